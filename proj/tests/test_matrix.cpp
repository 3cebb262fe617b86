#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gpner/matrix.hpp"
#include "gpner/rng.hpp"

using namespace gpner;

namespace {

int randbelow(Rng& rng, int n) { return rng.uniform_int(0, n - 1); }

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m.at(i, j) = rng.uniform(-2.0, 2.0);
  return m;
}

// Independent triple-loop product used as the reference for matmul.
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols(); ++k) acc += a.at(i, k) * b.at(k, j);
      out.at(i, j) = acc;
    }
  return out;
}

void check_close(const Matrix& a, const Matrix& b, double tol) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      CHECK(a.at(i, j) == doctest::Approx(b.at(i, j)).epsilon(tol));
}

}  // namespace

TEST_CASE("matmul matches hand-computed 2x2 product") {
  Matrix a(2, 2);
  a.at(0, 0) = 1;
  a.at(0, 1) = 2;
  a.at(1, 0) = 3;
  a.at(1, 1) = 4;
  Matrix b(2, 2);
  b.at(0, 0) = 5;
  b.at(0, 1) = 6;
  b.at(1, 0) = 7;
  b.at(1, 1) = 8;
  Matrix c = matmul(a, b);
  CHECK(c.at(0, 0) == 19.0);
  CHECK(c.at(0, 1) == 22.0);
  CHECK(c.at(1, 0) == 43.0);
  CHECK(c.at(1, 1) == 50.0);
}

TEST_CASE("matmul agrees with a naive triple loop on random inputs") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    int m = 1 + static_cast<int>(randbelow(rng, 7));
    int k = 1 + static_cast<int>(randbelow(rng, 7));
    int n = 1 + static_cast<int>(randbelow(rng, 7));
    Matrix a = random_matrix(m, k, rng);
    Matrix b = random_matrix(k, n, rng);
    check_close(matmul(a, b), naive_matmul(a, b), 1e-12);
  }
}

TEST_CASE("matmul_nt and matmul_tn agree with explicit transposes") {
  Rng rng(12);
  Matrix a = random_matrix(4, 6, rng);
  Matrix b = random_matrix(5, 6, rng);  // a * b^T is 4x5
  check_close(matmul_nt(a, b), naive_matmul(a, transpose(b)), 1e-12);

  Matrix c = random_matrix(6, 4, rng);
  Matrix d = random_matrix(6, 5, rng);  // c^T * d is 4x5
  check_close(matmul_tn(c, d), naive_matmul(transpose(c), d), 1e-12);
}

TEST_CASE("identity is a multiplicative unit") {
  Rng rng(13);
  Matrix a = random_matrix(5, 5, rng);
  CHECK(matmul(a, Matrix::identity(5)) == a);
  CHECK(matmul(Matrix::identity(5), a) == a);
}

TEST_CASE("elementwise helpers") {
  Rng rng(14);
  Matrix a = random_matrix(3, 4, rng);
  Matrix b = random_matrix(3, 4, rng);

  Matrix s = add(a, b);
  Matrix d = sub(a, b);
  Matrix h = scale(a, -2.5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(s.at(i, j) == a.at(i, j) + b.at(i, j));
      CHECK(d.at(i, j) == a.at(i, j) - b.at(i, j));
      CHECK(h.at(i, j) == a.at(i, j) * -2.5);
    }

  Matrix acc = a;
  add_in_place(acc, b);
  CHECK(acc == s);
  acc = a;
  add_scaled_in_place(acc, b, 3.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(acc.at(i, j) == a.at(i, j) + 3.0 * b.at(i, j));

  Matrix cs = col_sums(a);
  REQUIRE(cs.rows() == 1);
  REQUIRE(cs.cols() == 4);
  for (int j = 0; j < 4; ++j) {
    double want = a.at(0, j) + a.at(1, j) + a.at(2, j);
    CHECK(cs.at(0, j) == doctest::Approx(want).epsilon(1e-15));
  }
}

TEST_CASE("affine equals matmul plus broadcast bias row") {
  Rng rng(15);
  Matrix x = random_matrix(4, 3, rng);
  Matrix w = random_matrix(3, 5, rng);
  Matrix b = random_matrix(1, 5, rng);
  Matrix got = affine(x, w, b);
  Matrix want = matmul(x, w);
  for (int i = 0; i < want.rows(); ++i)
    for (int j = 0; j < want.cols(); ++j) want.at(i, j) += b.at(0, j);
  check_close(got, want, 1e-12);
}

TEST_CASE("logsumexp0 hand values") {
  // Empty list contributes nothing: log(1 + 0) is exactly 0.
  CHECK(logsumexp0({}) == 0.0);
  // Single zero entry: log(1 + e^0) = log 2.
  CHECK(logsumexp0({0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  // log(1 + e^1 + e^2).
  double want = std::log(1.0 + std::exp(1.0) + std::exp(2.0));
  CHECK(logsumexp0({1.0, 2.0}) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("logsumexp0 is stable at extreme magnitudes") {
  // Huge positive entries: result tracks the max, no overflow to inf.
  double big = logsumexp0({1e4, 1e4 - 1.0});
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx(1e4 + std::log(1.0 + std::exp(-1.0)) )
                   .epsilon(1e-12));
  // Huge negative entries collapse to log(1) = 0 without underflow issues.
  CHECK(logsumexp0({-1e4, -9e3}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("logsumexp_with anchor 0 equals logsumexp0 bitwise") {
  Rng rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    int n = static_cast<int>(randbelow(rng, 6));
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(rng.uniform(-50.0, 50.0));
    CHECK(logsumexp_with(0.0, xs) == logsumexp0(xs));
  }
}

TEST_CASE("logsumexp_with general anchor matches direct formula") {
  std::vector<double> xs = {0.5, -1.25, 2.0};
  double anchor = 1.5;
  double want = std::log(std::exp(anchor) + std::exp(0.5) + std::exp(-1.25) +
                         std::exp(2.0));
  CHECK(logsumexp_with(anchor, xs) == doctest::Approx(want).epsilon(1e-14));
  // Empty tail: log(e^anchor) = anchor.
  CHECK(logsumexp_with(-3.75, {}) == doctest::Approx(-3.75).epsilon(1e-15));
}

TEST_CASE("row and column vector constructors") {
  Matrix r = Matrix::row_vector({1.0, 2.0, 3.0});
  CHECK(r.rows() == 1);
  CHECK(r.cols() == 3);
  CHECK(r.at(0, 2) == 3.0);
  Matrix c = Matrix::column_vector({4.0, 5.0});
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 1);
  CHECK(c.at(1, 0) == 5.0);
}

TEST_CASE("all_finite flags NaN and infinity") {
  Matrix m(2, 2, 1.0);
  CHECK(m.all_finite());
  m.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(m.all_finite());
  m.at(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_FALSE(m.all_finite());
}

TEST_CASE("param tracks value shape in its gradient") {
  Param p("p", Matrix(3, 4, 0.5));
  CHECK(p.grad.rows() == 3);
  CHECK(p.grad.cols() == 4);
  CHECK(p.size() == 12);
  p.grad.at(1, 2) = 7.0;
  p.reset_grad();
  CHECK(p.grad.at(1, 2) == 0.0);
}

TEST_CASE("matmul is associative on random conformable triples") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    int m = 1 + randbelow(rng, 5);
    int k = 1 + randbelow(rng, 5);
    int l = 1 + randbelow(rng, 5);
    int n = 1 + randbelow(rng, 5);
    Matrix a = random_matrix(m, k, rng);
    Matrix b = random_matrix(k, l, rng);
    Matrix c = random_matrix(l, n, rng);
    Matrix left = matmul(matmul(a, b), c);
    Matrix right = matmul(a, matmul(b, c));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(std::abs(left.at(i, j) - right.at(i, j)) <= 1e-9);
  }
}

TEST_CASE("logsumexp0 is monotone nondecreasing in every entry") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + randbelow(rng, 6);
    std::vector<double> xs(n);
    for (double& x : xs) x = rng.uniform(-3.0, 3.0);
    double before = logsumexp0(xs);
    int bump = randbelow(rng, n);
    xs[bump] += rng.uniform(0.0, 2.0) + 1e-9;
    CHECK(logsumexp0(xs) >= before);
    // And it always dominates both 0 and the largest entry.
    CHECK(logsumexp0(xs) >= 0.0);
    CHECK(logsumexp0(xs) >= *std::max_element(xs.begin(), xs.end()));
  }
}
