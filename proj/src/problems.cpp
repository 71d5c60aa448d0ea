#include "pipekrylov/problems.hpp"

#include <cmath>
#include <vector>

#include "pipekrylov/rng.hpp"

namespace pipekrylov {

ProblemInstance make_toy_diagonal(std::size_t n, double cond) {
  if (n < 2) throw ParameterError("make_toy_diagonal: n must be >= 2");
  if (!(cond > 1.0)) throw ParameterError("make_toy_diagonal: cond must be > 1");
  std::vector<double> lambda(n);
  for (std::size_t k = 0; k < n; ++k) {
    lambda[k] = 1.0 + (cond - 1.0) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  lambda[n - 1] = cond;
  Vector b(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Vector x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = b[k] / lambda[k];
  return {SparseMatrix::diagonal(lambda), std::move(b), std::move(x),
          "toy-diag(n=" + std::to_string(n) + ",cond=" + std::to_string(cond) + ")"};
}

ProblemInstance make_poisson(int dims, std::size_t m, std::uint64_t seed) {
  if (dims != 2 && dims != 3) throw ParameterError("make_poisson: dims must be 2 or 3");
  if (m < 2) throw ParameterError("make_poisson: n_per_side must be >= 2");
  const std::size_t nz = dims == 3 ? m : 1;
  const std::size_t n = m * m * nz;
  const double diag = 2.0 * dims;

  std::vector<SparseMatrix::Triplet> t;
  t.reserve(n * (2 * static_cast<std::size_t>(dims) + 1));
  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t row = i + m * (j + m * k);
        if (dims == 3 && k > 0) t.push_back({row, row - m * m, -1.0});
        if (j > 0) t.push_back({row, row - m, -1.0});
        if (i > 0) t.push_back({row, row - 1, -1.0});
        t.push_back({row, row, diag});
        if (i + 1 < m) t.push_back({row, row + 1, -1.0});
        if (j + 1 < m) t.push_back({row, row + m, -1.0});
        if (dims == 3 && k + 1 < nz) t.push_back({row, row + m * m, -1.0});
      }
    }
  }
  auto A = SparseMatrix::from_triplets(n, n, std::move(t), Symmetry::symmetric);
  SplitMix64 rng(seed);
  Vector x(n);
  for (std::size_t r = 0; r < n; ++r) x[r] = rng.uniform();
  Vector b = apply(A, x);
  return {std::move(A), std::move(b), std::move(x),
          "poisson" + std::to_string(dims) + "d(n=" + std::to_string(m) + ")"};
}

ProblemInstance make_sinker(std::size_t m, double contrast) {
  if (m < 4) throw ParameterError("make_sinker: n_per_side must be >= 4");
  if (!(contrast >= 1.0)) throw ParameterError("make_sinker: contrast must be >= 1");
  const double h = 1.0 / static_cast<double>(m + 1);
  const auto inside = [&](std::size_t i, std::size_t j) {
    const double x = static_cast<double>(i + 1) * h - 0.5;
    const double y = static_cast<double>(j + 1) * h - 0.5;
    return x * x + y * y < 0.25 * 0.25;
  };
  std::vector<double> kappa(m * m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) kappa[i + m * j] = inside(i, j) ? contrast : 1.0;
  }
  const auto face = [](double a, double b) { return 2.0 * a * b / (a + b); };

  const std::size_t n = m * m;
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(5 * n);
  Vector b(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t row = i + m * j;
      const double kc = kappa[row];
      // Boundary faces see a ghost node with the same coefficient.
      const double west = i > 0 ? face(kc, kappa[row - 1]) : kc;
      const double east = i + 1 < m ? face(kc, kappa[row + 1]) : kc;
      const double south = j > 0 ? face(kc, kappa[row - m]) : kc;
      const double north = j + 1 < m ? face(kc, kappa[row + m]) : kc;
      if (j > 0) t.push_back({row, row - m, -south});
      if (i > 0) t.push_back({row, row - 1, -west});
      t.push_back({row, row, west + east + south + north});
      if (i + 1 < m) t.push_back({row, row + 1, -east});
      if (j + 1 < m) t.push_back({row, row + m, -north});
      b[row] = inside(i, j) ? h * h : 0.0;
    }
  }
  return {SparseMatrix::from_triplets(n, n, std::move(t), Symmetry::symmetric), std::move(b),
          std::nullopt,
          "sinker(n=" + std::to_string(m) + ",contrast=" + std::to_string(contrast) + ")"};
}

ProblemInstance scale_symmetric(const ProblemInstance& p) {
  const Vector d = p.A.diagonal_values();
  Vector s(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) throw ParameterError("scale_symmetric: diagonal must be positive");
    s[i] = 1.0 / std::sqrt(d[i]);
  }
  const auto rp = p.A.row_ptr();
  const auto ci = p.A.col_idx();
  const auto va = p.A.values();
  std::vector<double> vals(va.size());
  for (std::size_t i = 0; i < p.A.rows(); ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) vals[k] = va[k] * (s[i] * s[ci[k]]);
  }
  // s[i] * s[j] commutes exactly, so a symmetric A stays bitwise symmetric.
  SparseMatrix As(p.A.rows(), p.A.cols(), {rp.begin(), rp.end()}, {ci.begin(), ci.end()},
                  std::move(vals), p.A.symmetry());
  Vector b(p.b.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = s[i] * p.b[i];
  std::optional<Vector> x;
  if (p.x_true) {
    x = Vector(p.x_true->size());
    for (std::size_t i = 0; i < x->size(); ++i) (*x)[i] = (*p.x_true)[i] / s[i];
  }
  return {std::move(As), std::move(b), std::move(x), p.label + "+scaled"};
}

}  // namespace pipekrylov
