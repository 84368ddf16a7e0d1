#include "smle/core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smle {

void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_dims(data_.size() == rows_ * cols_, "Matrix: rows*cols != data size");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<Vector> tmp;
  for (const auto& r : rows) tmp.emplace_back(r);
  return from_rows(tmp);
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require_dims(rows[i].size() == m.cols_, "Matrix::from_rows: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Vector Matrix::row_vector(std::size_t i) const {
  auto r = row(i);
  return {r.begin(), r.end()};
}

Vector Matrix::col_vector(std::size_t j) const {
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  require_dims(values.size() == cols_, "Matrix::append_row: width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Vector matvec(const Matrix& m, std::span<const double> v) {
  require_dims(m.cols() == v.size(), "matvec: cols != |v|");
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v);
  return out;
}

Vector matvec_transposed(const Matrix& m, std::span<const double> v) {
  require_dims(m.rows() == v.size(), "matvec_transposed: rows != |v|");
  Vector out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) axpy(v[i], m.row(i), out);
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_dims(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_dims(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double l2sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double linf(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_dims(a.size() == b.size(), "add: length mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
  require_dims(a.size() == b.size(), "sub: length mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scale(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (double& x : out) x *= s;
  return out;
}

void axpy(double s, std::span<const double> x, std::span<double> y) {
  require_dims(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Vector lu_solve(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  require_dims(a.cols() == n && b.size() == n, "lu_solve: shape mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) < 1e-300) throw std::runtime_error("lu_solve: singular matrix");
    if (piv != k) {
      std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(piv).begin());
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

}  // namespace smle
