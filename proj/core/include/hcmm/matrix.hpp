#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace hcmm {

// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  std::vector<double> multiply(std::span<const double> x) const;
  DenseMatrix multiply(const DenseMatrix& rhs) const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solves S y = z for square S by Gaussian elimination with partial pivoting.
// Throws SingularSystemError when a pivot falls below
// pivot_tolerance * max|S|.
std::vector<double> solve_partial_pivoting(DenseMatrix S, std::vector<double> z,
                                           double pivot_tolerance = 1e-10);

double max_abs(std::span<const double> v);

}  // namespace hcmm
