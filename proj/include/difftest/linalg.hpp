#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace difftest {

/// Small dense row-major matrix. Dimensions in this library are tiny
/// (state dimension d and parameter count p+q), so nothing here is blocked
/// or vectorised.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// In-place Cholesky factorisation of the n x n symmetric matrix stored
/// row-major in `a`. On success the lower triangle holds L with A = L L';
/// the strict upper triangle is left untouched. Returns false if A is not
/// numerically positive definite.
bool cholesky_in_place(std::span<double> a, std::size_t n) noexcept;

/// log det A from its Cholesky factor.
double log_det_from_cholesky(std::span<const double> l, std::size_t n) noexcept;

/// Solves L L' y = b in place (b overwritten with y).
void cholesky_solve_in_place(std::span<const double> l, std::size_t n, std::span<double> b) noexcept;

/// Inverse of an SPD matrix, or nullopt if factorisation fails.
std::optional<Matrix> spd_inverse(const Matrix& a);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const Matrix& a);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace difftest
