#include "gpner/rope.hpp"

#include <cmath>
#include <string>

#include "gpner/error.hpp"

namespace gpner {

RotaryEncoding::RotaryEncoding(int dim, double base) : dim_(dim), base_(base) {
  if (dim <= 0 || dim % 2 != 0) {
    throw DimError("rotary encoding needs a positive even dimension, got " +
                   std::to_string(dim));
  }
  if (base <= 0.0) {
    throw ValidationError("rope.base must be positive");
  }
  angles_.resize(dim / 2);
  for (int k = 0; k < dim / 2; ++k) {
    angles_[k] = std::pow(base, -2.0 * k / dim);
  }
}

void RotaryEncoding::rotate_span(double* row, double position) const {
  for (int k = 0; k < dim_ / 2; ++k) {
    const double a = position * angles_[k];
    const double c = std::cos(a);
    const double s = std::sin(a);
    const double x0 = row[2 * k];
    const double x1 = row[2 * k + 1];
    row[2 * k] = x0 * c - x1 * s;
    row[2 * k + 1] = x0 * s + x1 * c;
  }
}

std::vector<double> RotaryEncoding::rotate(const std::vector<double>& x,
                                           int position) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw DimError("rotate: vector length " + std::to_string(x.size()) +
                   " does not match encoding dim " + std::to_string(dim_));
  }
  std::vector<double> out = x;
  rotate_span(out.data(), static_cast<double>(position));
  return out;
}

double RotaryEncoding::rel_score(const std::vector<double>& q,
                                 const std::vector<double>& k, int i,
                                 int j) const {
  const std::vector<double> qi = rotate(q, i);
  const std::vector<double> kj = rotate(k, j);
  double s = 0.0;
  for (int t = 0; t < dim_; ++t) s += qi[t] * kj[t];
  return s;
}

void RotaryEncoding::rotate_rows_in_place(Matrix& x, int offset) const {
  if (x.cols() != dim_) {
    throw DimError("rotate_rows: matrix " + x.shape_str() +
                   " does not match encoding dim " + std::to_string(dim_));
  }
  for (int i = 0; i < x.rows(); ++i) {
    rotate_span(x.row(i), static_cast<double>(i + offset));
  }
}

void RotaryEncoding::rotate_rows_inverse_in_place(Matrix& x, int offset) const {
  if (x.cols() != dim_) {
    throw DimError("rotate_rows_inverse: matrix " + x.shape_str() +
                   " does not match encoding dim " + std::to_string(dim_));
  }
  for (int i = 0; i < x.rows(); ++i) {
    rotate_span(x.row(i), -static_cast<double>(i + offset));
  }
}

}  // namespace gpner
