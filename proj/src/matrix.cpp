#include "gpner/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "gpner/error.hpp"

namespace gpner {

Matrix::Matrix(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw DimError("matrix dimensions must be nonnegative, got " +
                   std::to_string(rows) + "x" + std::to_string(cols));
  }
  data_.assign(static_cast<size_t>(rows) * cols, fill);
}

std::string Matrix::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::row_vector(const std::vector<double>& v) {
  Matrix m(1, static_cast<int>(v.size()));
  m.data() = v;
  return m;
}

Matrix Matrix::column_vector(const std::vector<double>& v) {
  Matrix m(static_cast<int>(v.size()), 1);
  m.data() = v;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimError("matmul: " + a.shape_str() + " * " + b.shape_str());
  }
  Matrix c(a.rows(), b.cols());
  // k increases monotonically per output cell, so the summation order over
  // the inner dimension is the plain left-to-right one.
  for (int i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i);
    double* cr = c.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = ar[k];
      const double* br = b.row(k);
      for (int j = 0; j < b.cols(); ++j) cr[j] += aik * br[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimError("matmul_nt: " + a.shape_str() + " * " + b.shape_str() +
                   "^T");
  }
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i);
    double* cr = c.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double* br = b.row(j);
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += ar[k] * br[k];
      cr[j] = s;
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimError("matmul_tn: " + a.shape_str() + "^T * " + b.shape_str());
  }
  Matrix c(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k) {
    const double* ar = a.row(k);
    const double* br = b.row(k);
    for (int i = 0; i < a.cols(); ++i) {
      double* cr = c.row(i);
      const double aki = ar[i];
      for (int j = 0; j < b.cols(); ++j) cr[j] += aki * br[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
  }
  return t;
}

static void check_same_shape(const Matrix& a, const Matrix& b,
                             const char* op) {
  if (!a.same_shape(b)) {
    throw DimError(std::string(op) + ": " + a.shape_str() + " vs " +
                   b.shape_str());
  }
}

Matrix add(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "add");
  Matrix c = a;
  for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "sub");
  Matrix c = a;
  for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

Matrix scale(const Matrix& a, double c) {
  Matrix r = a;
  for (double& v : r.data()) v *= c;
  return r;
}

void add_in_place(Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "add_in_place");
  for (size_t i = 0; i < a.data().size(); ++i) a.data()[i] += b.data()[i];
}

void add_scaled_in_place(Matrix& a, const Matrix& b, double c) {
  check_same_shape(a, b, "add_scaled_in_place");
  for (size_t i = 0; i < a.data().size(); ++i) a.data()[i] += c * b.data()[i];
}

Matrix col_sums(const Matrix& a) {
  Matrix s(1, a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    const double* r = a.row(i);
    for (int j = 0; j < a.cols(); ++j) s.at(0, j) += r[j];
  }
  return s;
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  if (b.rows() != 1 || b.cols() != w.cols()) {
    throw DimError("affine: bias " + b.shape_str() + " does not match weight " +
                   w.shape_str());
  }
  Matrix y = matmul(x, w);
  for (int i = 0; i < y.rows(); ++i) {
    double* r = y.row(i);
    for (int j = 0; j < y.cols(); ++j) r[j] += b.at(0, j);
  }
  return y;
}

double logsumexp_with(double anchor, const std::vector<double>& xs) {
  double m = anchor;
  for (double x : xs) m = std::max(m, x);
  double s = std::exp(anchor - m);
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double logsumexp0(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double m = 0.0;
  for (double x : xs) m = std::max(m, x);
  double s = std::exp(-m);
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace gpner
