#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace eerkit {

class FeatureMatrix;

/// Mean, sample standard deviation, and group size of one set of runs.
struct GroupSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

double mean(std::span<const double> values);
double sample_sd(std::span<const double> values);
GroupSummary summarize(std::span<const double> values);

/// Sample sd / sqrt(count).
double standard_error(std::span<const double> values);

/// One-way random-effects intraclass correlation for paired sessions:
/// (MSB - MSW) / (MSB + MSW), clamped to [-1, 1]. Needs at least 3 subjects.
double estimate_icc(std::span<const double> session1, std::span<const double> session2);

/// Per-feature ICCs of a two-session matrix.
std::vector<double> feature_iccs(const FeatureMatrix& matrix);

/// Product-moment correlation.
double pearson(std::span<const double> x, std::span<const double> y);

/// Two-sample t-test without the equal-variance assumption;
/// Welch-Satterthwaite degrees of freedom, two-sided p.
WelchResult welch_t(const GroupSummary& a, const GroupSummary& b);

/// Continued-fraction evaluation, accurate to ~1e-15 well inside the domain;
/// the Student-t CDF built on it is good to about 1e-10.
double regularized_incomplete_beta(double x, double a, double b);
double student_t_cdf(double t, double df);

}  // namespace eerkit
