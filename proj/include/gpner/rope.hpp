#pragma once

#include <vector>

#include "gpner/matrix.hpp"

namespace gpner {

// Rotary position encoding. Position p acts on a vector as a block-diagonal
// rotation: dimension pair (2k, 2k+1) is rotated by p * theta_k with the
// geometric angle schedule theta_k = base^(-2k/d). Each rotation is
// orthogonal, R_0 is the identity, and R_i^T R_j = R_{j-i}, which makes
// query/key dot products depend only on the relative position.
class RotaryEncoding {
 public:
  // dim must be even and positive; base defaults to 10000.
  explicit RotaryEncoding(int dim, double base = 10000.0);

  int dim() const { return dim_; }
  double base() const { return base_; }
  const std::vector<double>& angles() const { return angles_; }

  // Rotate the length-dim vector x to position p (p >= 0).
  std::vector<double> rotate(const std::vector<double>& x, int position) const;

  // <R_i q, R_j k>. Equals <q, R_{j-i} k> for any i, j.
  double rel_score(const std::vector<double>& q, const std::vector<double>& k,
                   int i, int j) const;

  // Rotate row r of x (in place) to position r + offset. Used to rotate a
  // whole n x d query/key matrix where row index is the token position.
  void rotate_rows_in_place(Matrix& x, int offset = 0) const;

  // Inverse of rotate_rows_in_place (rotation by the negated position);
  // this is the backward map of the forward rotation.
  void rotate_rows_inverse_in_place(Matrix& x, int offset = 0) const;

 private:
  void rotate_span(double* row, double position) const;

  int dim_ = 0;
  double base_ = 10000.0;
  std::vector<double> angles_;  // theta_k, k = 0..dim/2-1
};

}  // namespace gpner
