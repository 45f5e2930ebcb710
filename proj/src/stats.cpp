#include "eerkit/stats.hpp"

#include <fmt/format.h>

#include <cmath>

#include "eerkit/error.hpp"
#include "eerkit/feature_matrix.hpp"

namespace eerkit {

double mean(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) throw DataError("sample sd needs at least 2 values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

GroupSummary summarize(std::span<const double> values) {
  return GroupSummary{mean(values), sample_sd(values), values.size()};
}

double standard_error(std::span<const double> values) {
  return sample_sd(values) / std::sqrt(static_cast<double>(values.size()));
}

double estimate_icc(std::span<const double> session1, std::span<const double> session2) {
  const std::size_t n = session1.size();
  if (session2.size() != n) throw DataError("session vectors differ in length");
  if (n < 3) throw DataError("ICC estimation needs at least 3 subjects");

  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) grand += session1[i] + session2[i];
  grand /= static_cast<double>(2 * n);

  double ssb = 0.0, ssw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = 0.5 * (session1[i] + session2[i]);
    ssb += (mi - grand) * (mi - grand);
    const double d1 = session1[i] - mi;
    const double d2 = session2[i] - mi;
    ssw += d1 * d1 + d2 * d2;
  }
  const double msb = 2.0 * ssb / static_cast<double>(n - 1);
  const double msw = ssw / static_cast<double>(n);
  const double denom = msb + msw;
  if (!(denom > 0.0)) throw DataError("zero total variance, ICC undefined");
  const double icc = (msb - msw) / denom;
  return icc < -1.0 ? -1.0 : (icc > 1.0 ? 1.0 : icc);
}

std::vector<double> feature_iccs(const FeatureMatrix& matrix) {
  const std::size_t n = matrix.subjects(), k = matrix.features();
  std::vector<double> iccs(k);
  std::ptrdiff_t bad_feature = -1;  // exceptions may not cross the parallel region
#pragma omp parallel
  {
    std::vector<double> s1(n), s2(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(k); ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        s1[i] = matrix.value(i, static_cast<std::size_t>(j), 0);
        s2[i] = matrix.value(i, static_cast<std::size_t>(j), 1);
      }
      try {
        iccs[static_cast<std::size_t>(j)] = estimate_icc(s1, s2);
      } catch (const DataError&) {
#pragma omp critical
        {
          if (bad_feature < 0 || j < bad_feature) bad_feature = j;
        }
      }
    }
  }
  if (bad_feature >= 0) {
    throw DataError(fmt::format("feature {}: ICC undefined (zero variance or too few subjects)",
                                bad_feature));
  }
  return iccs;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n || n < 2) throw DataError("pearson needs two equal-length vectors, n >= 2");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DataError("pearson: zero variance input");
  const double r = sxy / std::sqrt(sxx * syy);
  return r < -1.0 ? -1.0 : (r > 1.0 ? 1.0 : r);
}

WelchResult welch_t(const GroupSummary& a, const GroupSummary& b) {
  if (a.n < 2 || b.n < 2) throw DataError("welch_t needs n >= 2 in both groups");
  if (!(a.sd >= 0.0) || !(b.sd >= 0.0)) throw DataError("welch_t: negative sd");
  const double va = a.sd * a.sd / static_cast<double>(a.n);
  const double vb = b.sd * b.sd / static_cast<double>(b.n);
  const double vsum = va + vb;
  if (!(vsum > 0.0)) throw DataError("welch_t: both groups have zero variance");

  WelchResult r;
  r.t = (a.mean - b.mean) / std::sqrt(vsum);
  r.df = vsum * vsum /
         (va * va / static_cast<double>(a.n - 1) + vb * vb / static_cast<double>(b.n - 1));
  r.p = 2.0 * (1.0 - student_t_cdf(std::fabs(r.t), r.df));
  if (r.p > 1.0) r.p = 1.0;
  if (r.p < 0.0) r.p = 0.0;
  return r;
}

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Lentz's algorithm on the standard continued fraction for I_x(a,b).
double ibeta_continued_fraction(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  constexpr int max_iter = 500;

  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;

  for (int m = 1; m <= max_iter; ++m) {
    const double dm = static_cast<double>(m);
    double num = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;

    num = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double mult = d * c;
    h *= mult;
    if (std::fabs(mult - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DataError("ibeta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DataError(fmt::format("ibeta: x = {} outside [0,1]", x));
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * ibeta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                   ibeta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw DataError("student_t_cdf requires df > 0");
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(x, 0.5 * df, 0.5);
  return t > 0.0 ? 1.0 - tail : tail;
}

}  // namespace eerkit
