#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pipekrylov/linalg.hpp"
#include "pipekrylov/rng.hpp"

namespace pipekrylov {

enum class PcKind { identity, jacobi, block_jacobi, nested_krylov, noisy };

/// Preconditioner application r -> B(r). Nonlinear kinds are allowed; the
/// only contract is that apply() never modifies its argument.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;

  virtual Vector apply(const Vector& r) = 0;
  virtual bool is_linear() const = 0;
  virtual std::string name() const = 0;
  /// Deep copy including any generator state.
  virtual std::unique_ptr<Preconditioner> clone() const = 0;
};

std::unique_ptr<Preconditioner> make_identity();
/// Throws SetupError on a zero diagonal entry.
std::unique_ptr<Preconditioner> make_jacobi(const SparseMatrix& A);
/// Contiguous equal blocks (the last absorbs the remainder); each block is
/// approximately solved by `inner_iters` Jacobi-PCG steps from a zero guess.
std::unique_ptr<Preconditioner> make_block_jacobi(const SparseMatrix& A, std::size_t n_blocks,
                                                  int inner_iters = 5);
/// `inner_iters` Jacobi-PCG steps on the full operator from a zero guess.
std::unique_ptr<Preconditioner> make_nested_krylov(const SparseMatrix& A, int inner_iters = 5);
/// r + eta * ||r|| * g with g a unit-norm Gaussian direction.
std::unique_ptr<Preconditioner> make_noisy(double eta, std::uint64_t seed);

std::unique_ptr<Preconditioner> make_preconditioner(PcKind kind, const SparseMatrix& A,
                                                    double eta = 0.0, std::uint64_t seed = 0,
                                                    std::size_t n_blocks = 4, int inner_iters = 5);

/// Fixed number of Jacobi-preconditioned CG steps on A z = r from z = 0. Stops
/// early only on an exactly vanishing or non-positive curvature.
Vector jacobi_pcg_fixed(const SparseMatrix& A, const Vector& inv_diag, const Vector& r, int iters);

struct FaithfulnessEstimate {
  double c_hat = 0.0;
  int samples = 0;
  std::vector<double> ratios;
};

/// Samples ||B(A v) - v|| / ||v|| over seeded random unit vectors v.
FaithfulnessEstimate probe_faithfulness(Preconditioner& B, const SparseMatrix& A, int n_samples,
                                        std::uint64_t seed);

}  // namespace pipekrylov
