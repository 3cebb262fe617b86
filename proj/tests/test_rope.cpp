#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gpner/error.hpp"
#include "gpner/matrix.hpp"
#include "gpner/rng.hpp"
#include "gpner/rope.hpp"

using namespace gpner;

namespace {

int randbelow(Rng& rng, int n) { return rng.uniform_int(0, n - 1); }

std::vector<double> random_vec(int d, Rng& rng) {
  std::vector<double> v(d);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

}  // namespace

TEST_CASE("rotation at position 0 is the identity") {
  RotaryEncoding rope(8, 10000.0);
  Rng rng(21);
  std::vector<double> v = random_vec(8, rng);
  std::vector<double> r = rope.rotate(v, 0);
  for (int i = 0; i < 8; ++i) CHECK(r[i] == doctest::Approx(v[i]).epsilon(1e-15));
}

TEST_CASE("rotation preserves vector norm") {
  for (int d : {2, 8, 64}) {
    RotaryEncoding rope(d, 10000.0);
    Rng rng(22 + d);
    for (int pos : {0, 1, 5, 40}) {
      std::vector<double> v = random_vec(d, rng);
      std::vector<double> r = rope.rotate(v, pos);
      CHECK(norm(r) == doctest::Approx(norm(v)).epsilon(1e-12));
    }
  }
}

TEST_CASE("rotated dot product depends only on the position gap") {
  // The defining property: <R_i q, R_j k> is a function of j - i alone,
  // so shifting both positions by any offset leaves the score unchanged.
  for (int d : {8, 64}) {
    RotaryEncoding rope(d, 10000.0);
    Rng rng(31 + d);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> q = random_vec(d, rng);
      std::vector<double> k = random_vec(d, rng);
      int i = static_cast<int>(randbelow(rng, 20));
      int j = static_cast<int>(randbelow(rng, 20));
      double base_score = dot(rope.rotate(q, i), rope.rotate(k, j));
      for (int shift : {1, 3, 17}) {
        double shifted =
            dot(rope.rotate(q, i + shift), rope.rotate(k, j + shift));
        CHECK(shifted == doctest::Approx(base_score).epsilon(1e-6));
      }
      // And it equals rotating a single vector by the gap.
      double gap_score = dot(q, rope.rotate(k, j - i));
      CHECK(gap_score == doctest::Approx(base_score).epsilon(1e-6));
    }
  }
}

TEST_CASE("rel_score equals the dot product of rotated vectors") {
  RotaryEncoding rope(16, 10000.0);
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> q = random_vec(16, rng);
    std::vector<double> k = random_vec(16, rng);
    int i = static_cast<int>(randbelow(rng, 30));
    int j = static_cast<int>(randbelow(rng, 30));
    double direct = dot(rope.rotate(q, i), rope.rotate(k, j));
    CHECK(rope.rel_score(q, k, i, j) ==
          doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("frequencies follow the inverse power schedule") {
  double base = 10000.0;
  RotaryEncoding rope(8, base);
  std::vector<double> got = rope.angles();
  REQUIRE(got.size() == 4);
  for (int k = 0; k < 4; ++k) {
    double want = std::pow(base, -2.0 * k / 8.0);
    CHECK(got[k] == doctest::Approx(want).epsilon(1e-14));
  }
  // First pair always rotates at unit frequency.
  CHECK(got[0] == 1.0);
}

TEST_CASE("first pair rotates by exactly the position angle") {
  RotaryEncoding rope(2, 10000.0);
  std::vector<double> v = {1.0, 0.0};
  for (int pos : {1, 2, 7}) {
    std::vector<double> r = rope.rotate(v, pos);
    CHECK(r[0] == doctest::Approx(std::cos(pos)).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(std::sin(pos)).epsilon(1e-14));
  }
}

TEST_CASE("rotate_rows_in_place matches per-row rotate") {
  RotaryEncoding rope(8, 10000.0);
  Rng rng(51);
  Matrix m(5, 8);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 8; ++j) m.at(i, j) = rng.uniform(-1.0, 1.0);
  Matrix rotated = m;
  rope.rotate_rows_in_place(rotated);
  for (int i = 0; i < 5; ++i) {
    std::vector<double> row(m.row(i), m.row(i) + 8);
    std::vector<double> want = rope.rotate(row, i);
    for (int j = 0; j < 8; ++j)
      CHECK(rotated.at(i, j) == doctest::Approx(want[j]).epsilon(1e-14));
  }

  // Offset shifts every row's position uniformly.
  Matrix shifted = m;
  rope.rotate_rows_in_place(shifted, 3);
  for (int i = 0; i < 5; ++i) {
    std::vector<double> row(m.row(i), m.row(i) + 8);
    std::vector<double> want = rope.rotate(row, i + 3);
    for (int j = 0; j < 8; ++j)
      CHECK(shifted.at(i, j) == doctest::Approx(want[j]).epsilon(1e-14));
  }
}

TEST_CASE("rotate_rows_inverse_in_place undoes rotate_rows_in_place") {
  RotaryEncoding rope(16, 10000.0);
  Rng rng(52);
  Matrix m(7, 16);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 16; ++j) m.at(i, j) = rng.uniform(-1.0, 1.0);
  Matrix round = m;
  rope.rotate_rows_in_place(round);
  rope.rotate_rows_inverse_in_place(round);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 16; ++j)
      CHECK(round.at(i, j) == doctest::Approx(m.at(i, j)).epsilon(1e-12));
}

TEST_CASE("odd dimension is rejected") {
  CHECK_THROWS_AS(RotaryEncoding(7, 10000.0), DimError);
}
