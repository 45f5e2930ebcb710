#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "eerkit/error.hpp"
#include "eerkit/rng.hpp"
#include "eerkit/stats.hpp"
#include "eerkit/synthgen.hpp"

using namespace eerkit;

TEST_CASE("icc of perfectly repeated measurements is 1") {
  const std::vector<double> s1{0.3, 1.7, -2.2, 0.9, 4.0};
  CHECK(estimate_icc(s1, s1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("icc of independent sessions is near zero") {
  Rng rng(1);
  const std::size_t n = 10000;
  std::vector<double> s1(n), s2(n);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i] = rng.next_normal();
    s2[i] = rng.next_normal();
  }
  CHECK(std::fabs(estimate_icc(s1, s2)) < 0.05);
}

TEST_CASE("icc recovers the generator target") {
  const FeatureMatrix m = generate(SynthSpec{10000, 3, 0.7, 8});
  for (double icc : feature_iccs(m)) CHECK(icc == doctest::Approx(0.7).epsilon(0.03));
}

TEST_CASE("icc input validation") {
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(estimate_icc(two, two), DataError);
  const std::vector<double> flat{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(estimate_icc(flat, flat), DataError);
}

TEST_CASE("pearson on exact cases") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  std::vector<double> y = x;
  CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  for (auto& v : y) v = -v;
  CHECK(pearson(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
  // hand computation: r = 9 / sqrt(84)
  const std::vector<double> y2{1.0, 2.0, 4.0};
  CHECK(pearson(x, y2) == doctest::Approx(9.0 / std::sqrt(84.0)).epsilon(1e-12));
  const std::vector<double> flat{2.0, 2.0, 2.0};
  CHECK_THROWS_AS(pearson(x, flat), DataError);
}

TEST_CASE("welch on a published summary row") {
  // Band 5 at N=1,000 vs N=10,000 group summaries
  const WelchResult r = welch_t({17.360, 0.726, 158}, {17.320, 0.473, 68});
  CHECK(std::fabs(r.t - 0.483) <= 0.1);
  CHECK(std::fabs(r.df - 189.0) <= 2.0);
  CHECK(std::fabs(r.p - 0.629) <= 0.02);
}

TEST_CASE("welch symmetry and degenerate cases") {
  const GroupSummary a{10.0, 1.0, 20}, b{11.0, 2.0, 35};
  const WelchResult ab = welch_t(a, b), ba = welch_t(b, a);
  CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-12));
  CHECK(ab.df == doctest::Approx(ba.df).epsilon(1e-12));
  CHECK(ab.p == doctest::Approx(ba.p).epsilon(1e-12));

  const WelchResult same = welch_t(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == doctest::Approx(1.0).epsilon(1e-12));

  // equal n and sd reduce Welch df to the pooled 2(n-1)
  const WelchResult pooled = welch_t({1.0, 0.5, 12}, {2.0, 0.5, 12});
  CHECK(pooled.df == doctest::Approx(22.0).epsilon(1e-9));

  CHECK_THROWS_AS(welch_t({1.0, 0.0, 5}, {2.0, 0.0, 5}), DataError);
}

TEST_CASE("standard error basics") {
  const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
  CHECK(standard_error(flat) == 0.0);
  const std::vector<double> pair{0.0, 2.0};  // sd = sqrt(2), / sqrt(2) = 1
  CHECK(standard_error(pair) == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(77);
  std::vector<double> draws(48);
  for (auto& d : draws) d = rng.next_normal();
  const double se = standard_error(draws);  // expectation 1/sqrt(48) = 0.144
  CHECK(se > 0.09);
  CHECK(se < 0.21);
}

TEST_CASE("student t cdf against a quadrature oracle") {
  // Simpson integration of the t density, written independently of the
  // incomplete-beta route the implementation uses.
  auto pdf = [](double x, double df) {
    return std::exp(std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df)) /
           std::sqrt(df * M_PI) * std::pow(1.0 + x * x / df, -0.5 * (df + 1.0));
  };
  auto cdf_oracle = [&](double x, double df) {
    const int steps = 20000;  // even
    const double h = x / steps;
    double sum = pdf(0.0, df) + pdf(x, df);
    for (int i = 1; i < steps; ++i) {
      sum += pdf(i * h, df) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return 0.5 + sum * h / 3.0;
  };

  for (const auto& [x, df] : std::vector<std::pair<double, double>>{
           {0.5, 3.0}, {1.7, 10.0}, {2.5, 188.9}, {0.4914, 188.9}, {4.0, 2.5}}) {
    CHECK(student_t_cdf(x, df) == doctest::Approx(cdf_oracle(x, df)).epsilon(1e-8));
    CHECK(student_t_cdf(-x, df) == doctest::Approx(1.0 - cdf_oracle(x, df)).epsilon(1e-8));
  }
  CHECK(student_t_cdf(0.0, 7.0) == 0.5);
}

TEST_CASE("incomplete beta symmetry identity") {
  Rng rng(55);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.next_double();
    const double a = 0.5 + 20.0 * rng.next_double();
    const double b = 0.5 + 20.0 * rng.next_double();
    const double lhs = regularized_incomplete_beta(x, a, b);
    const double rhs = 1.0 - regularized_incomplete_beta(1.0 - x, b, a);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    CHECK(lhs >= 0.0);
    CHECK(lhs <= 1.0);
  }
}

TEST_CASE("p-values are calibrated under the null") {
  Rng rng(2025);
  const int sims = 10000, na = 15, nb = 15;
  int rejections = 0;
  std::vector<double> ga(na), gb(nb);
  for (int s = 0; s < sims; ++s) {
    for (auto& v : ga) v = rng.next_normal();
    for (auto& v : gb) v = rng.next_normal();
    if (welch_t(summarize(ga), summarize(gb)).p < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / sims;
  CHECK(rate >= 0.04);
  CHECK(rate <= 0.06);
}

TEST_CASE("icc error shrinks as n grows") {
  std::vector<double> median_err;
  for (const std::size_t n : {std::size_t{100}, std::size_t{1000}, std::size_t{10000}}) {
    const FeatureMatrix m = generate(SynthSpec{n, 50, 0.6, 4242});
    std::vector<double> errs;
    for (double icc : feature_iccs(m)) errs.push_back(std::fabs(icc - 0.6));
    std::sort(errs.begin(), errs.end());
    median_err.push_back(errs[errs.size() / 2]);
  }
  CHECK(median_err[1] < median_err[0]);
  CHECK(median_err[2] < median_err[1]);
}
