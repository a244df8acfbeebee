#pragma once

#include <cstddef>
#include <vector>

namespace themis::linalg {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const { return data_; }

  std::vector<double> column(std::size_t c) const;
  Matrix transposed() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
double frobenius(const Matrix& a);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
  int sweeps = 0;
  bool converged = false;
};

/// Cyclic Jacobi rotations. Stops once the off-diagonal Frobenius norm drops
/// below `tolerance` or after `max_sweeps` full sweeps. Each eigenvector is
/// signed so that its largest-magnitude entry is positive.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-12, int max_sweeps = 100);

}  // namespace themis::linalg
