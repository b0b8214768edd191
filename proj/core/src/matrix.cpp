#include "hcmm/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace hcmm {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("DenseMatrix: data size " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) {
    throw std::invalid_argument("multiply: vector length " + std::to_string(x.size()) +
                                " != cols " + std::to_string(cols_));
  }
  std::vector<double> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* a = data_.data() + i * cols_;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) acc += a[j] * x[j];
    y[i] = acc;
  }
  return y;
}

DenseMatrix DenseMatrix::multiply(const DenseMatrix& rhs) const {
  if (rhs.rows_ != cols_) throw std::invalid_argument("multiply: inner dimensions differ");
  DenseMatrix out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    double* o = out.data_.data() + i * rhs.cols_;
    for (std::size_t k = 0; k < cols_; ++k) {
      const double s = data_[i * cols_ + k];
      if (s == 0.0) continue;
      const double* b = rhs.data_.data() + k * rhs.cols_;
      for (std::size_t j = 0; j < rhs.cols_; ++j) o[j] += s * b[j];
    }
  }
  return out;
}

std::vector<double> solve_partial_pivoting(DenseMatrix S, std::vector<double> z,
                                           double pivot_tolerance) {
  const std::size_t n = S.rows();
  if (S.cols() != n) throw std::invalid_argument("solve: matrix is not square");
  if (z.size() != n) throw std::invalid_argument("solve: right-hand side length mismatch");
  const double scale = max_abs(S.data());
  if (n > 0 && scale == 0.0) throw SingularSystemError("solve: zero matrix");
  const double threshold = pivot_tolerance * scale;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(S(col, col));
    for (std::size_t i = col + 1; i < n; ++i) {
      const double v = std::abs(S(i, col));
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (best <= threshold) {
      throw SingularSystemError("solve: matrix is singular to working precision at column " +
                                std::to_string(col));
    }
    if (pivot != col) {
      std::swap_ranges(S.row(col).begin(), S.row(col).end(), S.row(pivot).begin());
      std::swap(z[col], z[pivot]);
    }
    const auto prow = S.row(col);
    for (std::size_t i = col + 1; i < n; ++i) {
      auto r = S.row(i);
      const double f = r[col] / prow[col];
      if (f == 0.0) continue;
      r[col] = 0.0;
      for (std::size_t j = col + 1; j < n; ++j) r[j] -= f * prow[j];
      z[i] -= f * z[col];
    }
  }
  std::vector<double> y(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = z[i];
    const auto r = S.row(i);
    for (std::size_t j = i + 1; j < n; ++j) acc -= r[j] * y[j];
    y[i] = acc / r[i];
  }
  return y;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace hcmm
