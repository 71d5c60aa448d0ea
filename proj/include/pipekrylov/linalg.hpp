#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "pipekrylov/errors.hpp"

namespace pipekrylov {

/// Dense real vector with a length fixed at construction.
///
/// Entries may be modified in place, but the vector can never be resized;
/// assignment between vectors of different length throws DimensionError.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double value = 0.0) : v_(n, value) {}
  Vector(std::initializer_list<double> values) : v_(values) {}
  explicit Vector(std::vector<double> values) : v_(std::move(values)) {}

  Vector(const Vector&) = default;
  Vector(Vector&&) noexcept = default;
  Vector& operator=(const Vector& other);
  Vector& operator=(Vector&& other);

  std::size_t size() const noexcept { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }

  std::span<const double> values() const noexcept { return v_; }
  std::span<double> values() noexcept { return v_; }
  const double* data() const noexcept { return v_.data(); }

  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }

  /// this += alpha * x, elementwise in index order.
  Vector& add_scaled(double alpha, const Vector& x);
  Vector& scale(double alpha);

  bool operator==(const Vector& other) const = default;

 private:
  std::vector<double> v_;
};

enum class Symmetry { symmetric, general };

/// Compressed-row sparse operator. Column indices in each row are strictly
/// increasing; duplicates are rejected at construction.
class SparseMatrix {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix() = default;
  SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col_idx, std::vector<double> values, Symmetry symmetry);

  /// Builds from unordered triplets. Duplicate (row, col) pairs throw.
  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Triplet> entries, Symmetry symmetry);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return n_rows_; }
  std::size_t cols() const noexcept { return n_cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }
  Symmetry symmetry() const noexcept { return symmetry_; }
  bool is_symmetric_flagged() const noexcept { return symmetry_ == Symmetry::symmetric; }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Stored value at (i, j), zero when absent.
  double at(std::size_t i, std::size_t j) const;
  Vector diagonal_values() const;
  double frobenius_norm() const;

  /// Exact structural and numerical symmetry check by transposition.
  bool is_structurally_symmetric() const;

  SparseMatrix with_symmetry(Symmetry s) const;
  /// Principal submatrix on the contiguous index range [begin, end).
  SparseMatrix principal_block(std::size_t begin, std::size_t end) const;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
  Symmetry symmetry_ = Symmetry::general;
};

/// Sum of a[k]*b[k], accumulated left to right.
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
/// y + alpha * x
Vector axpy(const Vector& y, double alpha, const Vector& x);
/// u + sum_k coeffs[k] * vs[k], accumulated in index order k = 0..m-1.
Vector maxpy(const Vector& u, std::span<const double> coeffs, std::span<const Vector* const> vs);
Vector maxpy(const Vector& u, std::span<const double> coeffs, std::span<const Vector> vs);
/// A x
Vector apply(const SparseMatrix& A, const Vector& x);

bool all_finite(const Vector& a);

}  // namespace pipekrylov
