#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eerkit/scoring.hpp"

namespace eerkit {

/// Equal error rate as a fraction in [0, 1] plus search diagnostics. The
/// interface layer reports percent; internally everything is a fraction.
struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  std::size_t passes = 0;             // full data passes (binary-search path)
  std::uint64_t bracket_width_final = 0;  // scores inside the final bracket
  double lower = 0.0;                 // final bracket bounds
  double upper = 1.0;
  bool tie_fallback = false;          // bracket stopped shrinking (tied mass)
};

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;  // impostor scores strictly > threshold, as a fraction
  double frr = 0.0;  // genuine scores <= threshold, as a fraction
};

/// In-memory EER: sorts the pooled scores, evaluates FAR - FRR at midpoints
/// between adjacent distinct values plus the extremes, and linearly
/// interpolates the crossing.
EerResult exact_eer(std::span<const double> genuine, std::span<const double> impostor);

/// Per-pass diagnostics, filled when BinarySearchOptions::trace is set.
struct BisectionPass {
  double lower = 0.0;
  double upper = 1.0;
  double threshold = 0.0;
  std::uint64_t in_bracket = 0;
};

struct BinarySearchOptions {
  std::size_t stop_scores = 40;      // halt once the bracket holds this few scores
  std::size_t stagnation_limit = 64; // tie guard: passes without bracket shrinkage
  bool parallel = true;              // drive stream_counts vs stream_counts_serial
  std::vector<BisectionPass>* trace = nullptr;
};

/// The out-of-core EER: bisection on the threshold, one streaming pass per
/// probe, then FAR - FRR interpolated across the scores left in the final
/// bracket. Works purely on count passes, so it never materializes n^2
/// scores.
EerResult binary_search_eer(const ScoreModel& model, const BinarySearchOptions& options = {});

/// FAR/FRR over an ascending threshold grid, same >/<= conventions as
/// stream_counts.
std::vector<RocPoint> roc_curve(std::span<const double> genuine,
                                std::span<const double> impostor,
                                std::span<const double> grid);

}  // namespace eerkit
