#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace smle {

/// Raised whenever operand shapes disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  Vector row_vector(std::size_t i) const;
  Vector col_vector(std::size_t j) const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  Matrix transposed() const;
  /// Appends a row; the first append on an empty 0x0 matrix fixes the column count.
  void append_row(std::span<const double> values);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Vector matvec(const Matrix& m, std::span<const double> v);
/// mᵀ v without forming the transpose.
Vector matvec_transposed(const Matrix& m, std::span<const double> v);
Matrix matmul(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double l1(std::span<const double> v);
double l2sq(std::span<const double> v);
double linf(std::span<const double> v);

Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scale(std::span<const double> a, double s);
/// y += s * x
void axpy(double s, std::span<const double> x, std::span<double> y);

bool all_finite(std::span<const double> v);

/// Solves a x = b by LU with partial pivoting. Throws std::runtime_error if singular.
Vector lu_solve(Matrix a, Vector b);

void require_dims(bool ok, const std::string& what);

}  // namespace smle
