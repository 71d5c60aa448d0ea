#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pipekrylov/linalg.hpp"

namespace pipekrylov {

struct ProblemInstance {
  SparseMatrix A;
  Vector b;
  std::optional<Vector> x_true;
  std::string label;
};

/// diag(lambda) with n equally spaced eigenvalues in [1, cond], b = 1/sqrt(n).
ProblemInstance make_toy_diagonal(std::size_t n, double cond);

/// 5-point (dims = 2) or 7-point (dims = 3) Laplacian on an n_per_side^dims
/// interior grid, Dirichlet boundary eliminated, scaled by h^2 (diagonal 4 or 6).
/// x_true is uniform on [0, 1) from `seed`, b = A x_true.
ProblemInstance make_poisson(int dims, std::size_t n_per_side, std::uint64_t seed = 0);

/// Variable-coefficient diffusion -div(kappa grad u) on the unit square with
/// kappa = contrast inside the disc of radius 0.25 centred at (0.5, 0.5) and 1
/// elsewhere. Face coefficients are harmonic means of the adjacent nodal values.
/// Unit forcing inside the disc; no manufactured solution.
ProblemInstance make_sinker(std::size_t n_per_side, double contrast);

/// Symmetric diagonal scaling D^{-1/2} A D^{-1/2} (D = diag(A)) with b and
/// x_true transformed so the scaled system is equivalent.
ProblemInstance scale_symmetric(const ProblemInstance& p);

}  // namespace pipekrylov
