#include "pipekrylov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pipekrylov {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

}  // namespace

Vector& Vector::operator=(const Vector& other) {
  if (!v_.empty()) require_same_length(v_.size(), other.size(), "Vector assignment");
  v_ = other.v_;
  return *this;
}

Vector& Vector::operator=(Vector&& other) {
  if (!v_.empty()) require_same_length(v_.size(), other.size(), "Vector assignment");
  v_ = std::move(other.v_);
  return *this;
}

Vector& Vector::add_scaled(double alpha, const Vector& x) {
  require_same_length(size(), x.size(), "add_scaled");
  for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += alpha * x.v_[k];
  return *this;
}

Vector& Vector::scale(double alpha) {
  for (double& e : v_) e *= alpha;
  return *this;
}

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx, std::vector<double> values,
                           Symmetry symmetry)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)),
      symmetry_(symmetry) {
  if (row_ptr_.size() != n_rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size() ||
      col_idx_.size() != values_.size()) {
    throw ParameterError("SparseMatrix: inconsistent compressed-row arrays");
  }
  for (std::size_t i = 0; i < n_rows_; ++i) {
    if (row_ptr_[i] > row_ptr_[i + 1]) throw ParameterError("SparseMatrix: row_ptr not monotone");
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] >= n_cols_) throw ParameterError("SparseMatrix: column index out of range");
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
        throw ParameterError("SparseMatrix: column indices must be strictly increasing in row " +
                             std::to_string(i));
      }
    }
  }
  if (symmetry_ == Symmetry::symmetric && !is_structurally_symmetric()) {
    throw ParameterError("SparseMatrix: flagged symmetric but A != A^T");
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                         std::vector<Triplet> entries, Symmetry symmetry) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> row_ptr(n_rows + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(entries.size());
  vals.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& t = entries[k];
    if (t.row >= n_rows || t.col >= n_cols) throw ParameterError("from_triplets: index out of range");
    if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
      throw ParameterError("from_triplets: duplicate entry (" + std::to_string(t.row) + ", " +
                           std::to_string(t.col) + ")");
    }
    ++row_ptr[t.row + 1];
    cols.push_back(t.col);
    vals.push_back(t.value);
  }
  for (std::size_t i = 0; i < n_rows; ++i) row_ptr[i + 1] += row_ptr[i];
  return SparseMatrix(n_rows, n_cols, std::move(row_ptr), std::move(cols), std::move(vals), symmetry);
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<double> ones(n, 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag) {
  const std::size_t n = diag.size();
  std::vector<std::size_t> row_ptr(n + 1);
  std::vector<std::size_t> cols(n);
  for (std::size_t i = 0; i < n; ++i) {
    row_ptr[i + 1] = i + 1;
    cols[i] = i;
  }
  return SparseMatrix(n, n, std::move(row_ptr), std::move(cols),
                      std::vector<double>(diag.begin(), diag.end()), Symmetry::symmetric);
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Vector SparseMatrix::diagonal_values() const {
  Vector d(std::min(n_rows_, n_cols_));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
  return d;
}

double SparseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

bool SparseMatrix::is_structurally_symmetric() const {
  if (n_rows_ != n_cols_) return false;
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const std::size_t j = col_idx_[k];
      const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j]);
      const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j + 1]);
      const auto it = std::lower_bound(first, last, i);
      if (it == last || *it != i) return false;
      if (values_[static_cast<std::size_t>(it - col_idx_.begin())] != values_[k]) return false;
    }
  }
  return true;
}

SparseMatrix SparseMatrix::with_symmetry(Symmetry s) const {
  return SparseMatrix(n_rows_, n_cols_, row_ptr_, col_idx_, values_, s);
}

SparseMatrix SparseMatrix::principal_block(std::size_t begin, std::size_t end) const {
  if (begin > end || end > std::min(n_rows_, n_cols_)) {
    throw DimensionError("principal_block: range out of bounds");
  }
  const std::size_t n = end - begin;
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  for (std::size_t i = begin; i < end; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const std::size_t j = col_idx_[k];
      if (j >= begin && j < end) {
        cols.push_back(j - begin);
        vals.push_back(values_[k]);
      }
    }
    row_ptr[i - begin + 1] = cols.size();
  }
  return SparseMatrix(n, n, std::move(row_ptr), std::move(cols), std::move(vals), symmetry_);
}

double dot(const Vector& a, const Vector& b) {
  require_same_length(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector axpy(const Vector& y, double alpha, const Vector& x) {
  Vector out = y;
  out.add_scaled(alpha, x);
  return out;
}

Vector maxpy(const Vector& u, std::span<const double> coeffs, std::span<const Vector* const> vs) {
  if (coeffs.size() != vs.size()) {
    throw DimensionError("maxpy: " + std::to_string(coeffs.size()) + " coefficients for " +
                         std::to_string(vs.size()) + " vectors");
  }
  Vector out = u;
  for (std::size_t k = 0; k < vs.size(); ++k) out.add_scaled(coeffs[k], *vs[k]);
  return out;
}

Vector maxpy(const Vector& u, std::span<const double> coeffs, std::span<const Vector> vs) {
  std::vector<const Vector*> ptrs;
  ptrs.reserve(vs.size());
  for (const auto& v : vs) ptrs.push_back(&v);
  return maxpy(u, coeffs, std::span<const Vector* const>(ptrs));
}

Vector apply(const SparseMatrix& A, const Vector& x) {
  require_same_length(A.cols(), x.size(), "apply");
  Vector y(A.rows());
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto va = A.values();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += va[k] * x[ci[k]];
    y[i] = s;
  }
  return y;
}

bool all_finite(const Vector& a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace pipekrylov
