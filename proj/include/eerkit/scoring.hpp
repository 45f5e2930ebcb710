#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "eerkit/feature_matrix.hpp"

namespace eerkit {

/// Cosine similarity mapped to [0, 1]: (1 + cos) / 2, evaluated as
/// 1 - |a/|a| - b/|b||^2 / 4 so identical vectors score exactly 1 and no
/// score exceeds 1. Throws on zero-norm or mismatched inputs.
double similarity(std::span<const double> a, std::span<const double> b);

/// One threshold evaluation over the implicit n x n session-1 x session-2
/// score matrix (diagonal genuine, off-diagonal impostor).
struct ThresholdQuery {
  double threshold = 0.5;
  double lower = 0.0;
  double upper = 1.0;
  std::size_t collect_cap = 0;  // collect bracket scores up to this many
};

struct BracketScore {
  double score;
  bool genuine;
};

struct ThresholdCounts {
  std::uint64_t impostors_above = 0;     // impostor scores strictly > threshold
  std::uint64_t genuine_at_or_below = 0; // genuine scores <= threshold
  std::uint64_t in_bracket = 0;          // scores strictly inside (lower, upper)
  /// Exactly the bracket scores, with labels, iff in_bracket <= collect_cap.
  std::vector<BracketScore> bracket_scores;
  bool bracket_scores_complete = false;
};

/// Precomputed unit-normalized session vectors. The n^2 scores are never
/// stored; passes stream them in batches of `batch_size` session-1 subjects
/// against all session-2 subjects. Stateless across passes and safe to share
/// between threads.
class ScoreModel {
 public:
  explicit ScoreModel(const FeatureMatrix& matrix, std::size_t batch_size = 1000);

  std::size_t subjects() const noexcept { return n_; }
  std::size_t features() const noexcept { return k_; }
  std::size_t batch_size() const noexcept { return batch_size_; }
  std::uint64_t genuine_count() const noexcept { return n_; }
  std::uint64_t impostor_count() const noexcept {
    return static_cast<std::uint64_t>(n_) * n_ - n_;
  }

  /// Score of session-1 subject i against session-2 subject j. Same
  /// accumulation order as the streaming kernel, so the two agree bit-exactly.
  double score(std::size_t i, std::size_t j) const;

  const double* unit_session1() const noexcept { return u1_.data(); }
  const double* unit_session2_t() const noexcept { return u2t_.data(); }

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::size_t batch_size_ = 1000;
  std::vector<double> u1_;   // n x k, row-major
  std::vector<double> u2_;   // n x k, row-major
  std::vector<double> u2t_;  // k x n, u2 transposed for the batch sweep
};

/// Full pass over all n^2 scores. The parallel variant distributes batches
/// across OpenMP threads; counts merge by exact integer addition and bracket
/// collections merge in batch order, so both variants return identical
/// results for every batch size and thread count.
ThresholdCounts stream_counts(const ScoreModel& model, const ThresholdQuery& query);
ThresholdCounts stream_counts_serial(const ScoreModel& model, const ThresholdQuery& query);

/// Materializes (genuine, impostor) score lists. Guarded by `cap` because the
/// impostor list holds n^2 - n values; past the cap callers should use
/// stream_counts instead.
std::pair<std::vector<double>, std::vector<double>> all_scores(const ScoreModel& model,
                                                               std::size_t cap = 20000);

/// Debug dump (row, col, score, label), refused for n > 1000.
void dump_scores_csv(const ScoreModel& model, std::ostream& out);

}  // namespace eerkit
