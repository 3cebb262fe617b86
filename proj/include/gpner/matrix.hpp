#pragma once

#include <cassert>
#include <cstddef>
#include <string>
#include <vector>

namespace gpner {

// Dense row-major matrix of 64-bit floats. All training math runs in double
// so finite-difference checks stay tight; reductions use a fixed
// left-to-right order so runs are bitwise reproducible.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  long long size() const { return static_cast<long long>(rows_) * cols_; }
  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  std::string shape_str() const;

  double& at(int i, int j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  double at(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  double* row(int i) { return data_.data() + static_cast<size_t>(i) * cols_; }
  const double* row(int i) const {
    return data_.data() + static_cast<size_t>(i) * cols_;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v);
  bool all_finite() const;

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

  static Matrix identity(int n);
  static Matrix row_vector(const std::vector<double>& v);     // 1 x n
  static Matrix column_vector(const std::vector<double>& v);  // n x 1

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
void add_in_place(Matrix& a, const Matrix& b);
void add_scaled_in_place(Matrix& a, const Matrix& b, double c);
Matrix col_sums(const Matrix& a);  // 1 x cols

// Rows of x projected by w plus a broadcast bias row: (n x v)(v x d) + b.
// b must be a 1 x d row vector.
Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b);

// log(1 + sum_i exp(x_i)), stable for entries up to +-1e4. Empty input
// gives exactly 0.
double logsumexp0(const std::vector<double>& xs);

// log(exp(anchor) + sum_i exp(x_i)); logsumexp0 is the anchor = 0 case.
double logsumexp_with(double anchor, const std::vector<double>& xs);

// A trainable tensor with its gradient accumulator. Gradients accumulate
// across backward calls until reset_grad().
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)),
        grad(value.rows(), value.cols()) {}

  void reset_grad() { grad.fill(0.0); }
  long long size() const { return value.size(); }
};

}  // namespace gpner
