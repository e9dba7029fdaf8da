#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mrules {

using Vector = std::vector<double>;

/// Small dense row-major matrix. Rows are gradients throughout the engine,
/// so row access is the common path.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      assert(row.size() == cols_);
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix from_rows(const std::vector<Vector>& rows, std::size_t cols) {
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      assert(rows[i].size() == cols);
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  Vector row_vector(std::size_t i) const {
    auto r = row(i);
    return {r.begin(), r.end()};
  }

  void append_row(std::span<const double> r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    assert(r.size() == cols_);
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double norm_1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline double norm_2(std::span<const double> v) {
  return std::sqrt(dot(v, v));
}

inline Vector multiply(const Matrix& a, std::span<const double> x) {
  assert(a.cols() == x.size());
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

/// Computes aᵀy.
inline Vector multiply_transposed(const Matrix& a, std::span<const double> y) {
  assert(a.rows() == y.size());
  Vector x(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) x[j] += a(i, j) * y[i];
  return x;
}

/// x + t·d
inline Vector axpy(std::span<const double> x, double t,
                   std::span<const double> d) {
  assert(x.size() == d.size());
  Vector y(x.begin(), x.end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * d[i];
  return y;
}

inline Vector unit_vector(std::size_t n, std::size_t i, double sign = 1.0) {
  Vector e(n, 0.0);
  e[i] = sign;
  return e;
}

}  // namespace mrules
