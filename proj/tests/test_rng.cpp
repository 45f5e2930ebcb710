#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "eerkit/rng.hpp"

using eerkit::Rng;

TEST_CASE("equal seeds and tags give equal streams") {
  Rng a = Rng::stream(42, {1, 7});
  Rng b = Rng::stream(42, {1, 7});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different tags decorrelate streams") {
  Rng a = Rng::stream(42, {1, 7});
  Rng b = Rng::stream(42, {1, 8});
  Rng c = Rng::stream(43, {1, 7});
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    equal_ab += (va == b.next_u64());
    equal_ac += (va == c.next_u64());
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("next_double stays in [0,1)") {
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double v = r.next_double();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("next_below is in range and covers all residues") {
  Rng r(11);
  std::vector<int> hits(13, 0);
  for (int i = 0; i < 13000; ++i) {
    const auto v = r.next_below(13);
    REQUIRE(v < 13);
    ++hits[static_cast<std::size_t>(v)];
  }
  for (int h : hits) CHECK(h > 700);  // expectation 1000, generous band
}

TEST_CASE("normal deviates have the right first four moments") {
  Rng r(123);
  const int n = 200000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.next_normal();
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  const double skew = (s3 / n - 3 * mean * var - mean * mean * mean) / std::pow(var, 1.5);
  const double kurt = (s4 / n) / (var * var);
  CHECK(std::fabs(mean) < 0.01);
  CHECK(std::fabs(var - 1.0) < 0.02);
  CHECK(std::fabs(skew) < 0.05);
  CHECK(std::fabs(kurt - 3.0) < 0.1);
}
