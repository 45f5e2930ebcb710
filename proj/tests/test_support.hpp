#pragma once

// Shared helpers for the test binaries: independent counting oracles and
// small input builders. Everything here stays deliberately naive so it can
// serve as a reference for the optimized paths it checks.

#include <cstdint>
#include <vector>

#include "eerkit/feature_matrix.hpp"
#include "eerkit/rng.hpp"
#include "eerkit/scoring.hpp"
#include "eerkit/synthgen.hpp"

namespace testsupport {

inline eerkit::FeatureMatrix random_matrix(std::size_t n, std::size_t k, std::uint64_t seed,
                                           double icc = 0.7) {
  return eerkit::generate(eerkit::SynthSpec{n, k, icc, seed});
}

struct BruteCounts {
  std::uint64_t impostors_above = 0;
  std::uint64_t genuine_at_or_below = 0;
  std::uint64_t in_bracket = 0;
  std::vector<eerkit::BracketScore> bracket;
};

/// Materializes the full n x n score matrix one pair at a time through the
/// model's own pairwise scorer and counts directly.
inline BruteCounts brute_counts(const eerkit::ScoreModel& model,
                                const eerkit::ThresholdQuery& q) {
  BruteCounts out;
  const std::size_t n = model.subjects();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double s = model.score(i, j);
      const bool genuine = (i == j);
      if (!genuine && s > q.threshold) ++out.impostors_above;
      if (genuine && s <= q.threshold) ++out.genuine_at_or_below;
      if (s > q.lower && s < q.upper) {
        ++out.in_bracket;
        out.bracket.push_back({s, genuine});
      }
    }
  }
  return out;
}

inline std::vector<double> sorted_bracket_values(std::vector<eerkit::BracketScore> scores) {
  std::vector<double> v;
  v.reserve(scores.size());
  for (const auto& b : scores) v.push_back(b.score + (b.genuine ? 2.0 : 0.0));  // label-aware key
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace testsupport
