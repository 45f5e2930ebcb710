#include "eerkit/scoring.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>

#include "eerkit/error.hpp"

namespace eerkit {

namespace {

inline double clamp01(double s) { return s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s); }

inline double dot(const double* a, const double* b, std::size_t k) {
  double acc = 0.0;
  for (std::size_t t = 0; t < k; ++t) acc += a[t] * b[t];
  return acc;
}

// (1 + cos) / 2 evaluated as 1 - |a - b|^2 / 4 on unit vectors. The two are
// algebraically identical, but the distance form is exact where it matters:
// bitwise-equal vectors score exactly 1, and no score ever exceeds 1.
inline double unit_pair_score(const double* a, const double* b, std::size_t k) {
  double sq = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    const double diff = a[t] - b[t];
    sq += diff * diff;
  }
  return clamp01(1.0 - 0.25 * sq);
}

}  // namespace

double similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw DataError(fmt::format("similarity: vector lengths {} and {}", a.size(), b.size()));
  }
  const double na = std::sqrt(dot(a.data(), a.data(), a.size()));
  const double nb = std::sqrt(dot(b.data(), b.data(), b.size()));
  if (!(na > 0.0) || !(nb > 0.0)) throw DataError("similarity: zero-norm vector");
  std::vector<double> ua(a.size()), ub(b.size());
  const double ia = 1.0 / na, ib = 1.0 / nb;
  for (std::size_t t = 0; t < a.size(); ++t) {
    ua[t] = a[t] * ia;
    ub[t] = b[t] * ib;
  }
  return unit_pair_score(ua.data(), ub.data(), a.size());
}

ScoreModel::ScoreModel(const FeatureMatrix& matrix, std::size_t batch_size)
    : n_(matrix.subjects()), k_(matrix.features()),
      batch_size_(batch_size == 0 ? 1 : batch_size) {
  u1_.resize(n_ * k_);
  u2_.resize(n_ * k_);
  u2t_.resize(n_ * k_);

  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t s = 0; s < 2; ++s) {
      double* row = (s == 0 ? u1_.data() : u2_.data()) + i * k_;
      for (std::size_t j = 0; j < k_; ++j) row[j] = matrix.value(i, j, s);
      const double norm = std::sqrt(dot(row, row, k_));
      if (!(norm > 0.0)) {
        throw DataError(fmt::format("subject {} session {} has a zero-norm feature vector",
                                    matrix.subject_ids()[i], s + 1));
      }
      const double inv = 1.0 / norm;
      for (std::size_t j = 0; j < k_; ++j) row[j] *= inv;
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t t = 0; t < k_; ++t) u2t_[t * n_ + i] = u2_[i * k_ + t];
  }
}

double ScoreModel::score(std::size_t i, std::size_t j) const {
  return unit_pair_score(u1_.data() + i * k_, u2_.data() + j * k_, k_);
}

namespace {

// Batch sweep tiling. The j-block keeps a k x kJBlock slice of the transposed
// session-2 matrix hot while four session-1 rows stream against it; each
// (i, j) score accumulates in ascending-t order regardless of tiling, which
// pins the bit pattern of every score independent of batch size or schedule.
constexpr std::size_t kJBlock = 256;


struct BatchAccum {
  std::uint64_t impostors_above = 0;
  std::uint64_t genuine_at_or_below = 0;
  std::uint64_t in_bracket = 0;
  std::vector<BracketScore> bracket;
  bool overflow = false;
};

// Counts and (optionally) collects one scored stripe acc[0..jn) for
// session-1 subject gi against session-2 subjects [j0, j0+jn).
inline void scan_stripe(const double* acc, std::size_t j0, std::size_t jn, std::size_t gi,
                        const ThresholdQuery& q, BatchAccum& out) {
  // Count label-blind, then correct for the single diagonal (genuine) score
  // the stripe may contain; keeps the hot loop free of index tests.
  std::uint64_t above = 0, inbr = 0;
#pragma omp simd reduction(+ : above, inbr)
  for (std::size_t jj = 0; jj < jn; ++jj) {
    const double s = clamp01(1.0 - 0.25 * acc[jj]);
    above += static_cast<std::uint64_t>(s > q.threshold);
    inbr += static_cast<std::uint64_t>((s > q.lower) & (s < q.upper));
  }
  if (gi >= j0 && gi < j0 + jn) {
    const double sg = clamp01(1.0 - 0.25 * acc[gi - j0]);
    above -= static_cast<std::uint64_t>(sg > q.threshold);
    out.genuine_at_or_below += static_cast<std::uint64_t>(sg <= q.threshold);
  }
  out.impostors_above += above;
  out.in_bracket += inbr;

  if (!out.overflow && inbr > 0) {
    for (std::size_t jj = 0; jj < jn; ++jj) {
      const double s = clamp01(1.0 - 0.25 * acc[jj]);
      if (s > q.lower && s < q.upper) {
        if (out.bracket.size() < q.collect_cap) {
          out.bracket.push_back({s, j0 + jj == gi});
        } else {
          out.overflow = true;
          break;
        }
      }
    }
  }
}

// Accumulates squared distances for a 4-row tile of session-1 subjects
// against the j-tile [j0, j0+jn), then scans each stripe. The per-(i, j)
// accumulation is a t-ascending chain no matter the tiling, so every batch
// size produces the same score bits.
void process_tile4(const double* u1, const double* u2t, std::size_t n, std::size_t k,
                   std::size_t i0, std::size_t j0, std::size_t jn, const ThresholdQuery& q,
                   BatchAccum& out) {
  alignas(64) double acc[4][kJBlock];
  for (std::size_t ii = 0; ii < 4; ++ii) {
    for (std::size_t jj = 0; jj < jn; ++jj) acc[ii][jj] = 0.0;
  }
  const double* r0 = u1 + (i0 + 0) * k;
  const double* r1 = u1 + (i0 + 1) * k;
  const double* r2 = u1 + (i0 + 2) * k;
  const double* r3 = u1 + (i0 + 3) * k;
  for (std::size_t t = 0; t < k; ++t) {
    const double a0 = r0[t], a1 = r1[t], a2 = r2[t], a3 = r3[t];
    const double* bt = u2t + t * n + j0;
#pragma omp simd
    for (std::size_t jj = 0; jj < jn; ++jj) {
      const double b = bt[jj];
      const double d0 = a0 - b, d1 = a1 - b, d2 = a2 - b, d3 = a3 - b;
      acc[0][jj] += d0 * d0;
      acc[1][jj] += d1 * d1;
      acc[2][jj] += d2 * d2;
      acc[3][jj] += d3 * d3;
    }
  }
  for (std::size_t ii = 0; ii < 4; ++ii) {
    scan_stripe(acc[ii], j0, jn, i0 + ii, q, out);
  }
}

void process_tile1(const double* u1, const double* u2t, std::size_t n, std::size_t k,
                   std::size_t i, std::size_t j0, std::size_t jn, const ThresholdQuery& q,
                   BatchAccum& out) {
  alignas(64) double acc[kJBlock];
  for (std::size_t jj = 0; jj < jn; ++jj) acc[jj] = 0.0;
  const double* r0 = u1 + i * k;
  for (std::size_t t = 0; t < k; ++t) {
    const double a0 = r0[t];
    const double* bt = u2t + t * n + j0;
#pragma omp simd
    for (std::size_t jj = 0; jj < jn; ++jj) {
      const double d0 = a0 - bt[jj];
      acc[jj] += d0 * d0;
    }
  }
  scan_stripe(acc, j0, jn, i, q, out);
}

void process_batch(const ScoreModel& model, const ThresholdQuery& q, std::size_t b0,
                   std::size_t b1, BatchAccum& out) {
  const std::size_t n = model.subjects();
  const std::size_t k = model.features();
  const double* u1 = model.unit_session1();
  const double* u2t = model.unit_session2_t();

  for (std::size_t j0 = 0; j0 < n; j0 += kJBlock) {
    const std::size_t jn = std::min(kJBlock, n - j0);
    std::size_t i = b0;
    for (; i + 4 <= b1; i += 4) process_tile4(u1, u2t, n, k, i, j0, jn, q, out);
    for (; i < b1; ++i) process_tile1(u1, u2t, n, k, i, j0, jn, q, out);
  }
}

ThresholdCounts merge_batches(std::vector<BatchAccum>&& parts, const ThresholdQuery& q) {
  ThresholdCounts total;
  bool any_overflow = false;
  for (const auto& p : parts) {
    total.impostors_above += p.impostors_above;
    total.genuine_at_or_below += p.genuine_at_or_below;
    total.in_bracket += p.in_bracket;
    any_overflow = any_overflow || p.overflow;
  }
  if (!any_overflow && total.in_bracket <= q.collect_cap) {
    for (auto& p : parts) {
      total.bracket_scores.insert(total.bracket_scores.end(), p.bracket.begin(), p.bracket.end());
    }
    total.bracket_scores_complete = true;
  }
  return total;
}

void validate_query(const ThresholdQuery& q) {
  if (!(0.0 <= q.lower && q.lower <= q.threshold && q.threshold <= q.upper && q.upper <= 1.0)) {
    throw DataError(fmt::format("threshold query out of order: lower={} threshold={} upper={}",
                                q.lower, q.threshold, q.upper));
  }
}

}  // namespace

ThresholdCounts stream_counts(const ScoreModel& model, const ThresholdQuery& q) {
  validate_query(q);
  const std::size_t n = model.subjects();
  const std::size_t bs = model.batch_size();
  const std::size_t n_batches = (n + bs - 1) / bs;
  std::vector<BatchAccum> parts(n_batches);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_batches); ++b) {
    const std::size_t b0 = static_cast<std::size_t>(b) * bs;
    const std::size_t b1 = std::min(n, b0 + bs);
    process_batch(model, q, b0, b1, parts[static_cast<std::size_t>(b)]);
  }
  return merge_batches(std::move(parts), q);
}

ThresholdCounts stream_counts_serial(const ScoreModel& model, const ThresholdQuery& q) {
  validate_query(q);
  const std::size_t n = model.subjects();
  const std::size_t bs = model.batch_size();
  const std::size_t n_batches = (n + bs - 1) / bs;
  std::vector<BatchAccum> parts(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    const std::size_t b0 = b * bs;
    const std::size_t b1 = std::min(n, b0 + bs);
    process_batch(model, q, b0, b1, parts[b]);
  }
  return merge_batches(std::move(parts), q);
}

std::pair<std::vector<double>, std::vector<double>> all_scores(const ScoreModel& model,
                                                               std::size_t cap) {
  const std::size_t n = model.subjects();
  if (n > cap) {
    throw DataError(fmt::format(
        "all_scores: n = {} exceeds the in-memory cap {}; use the streaming path "
        "(stream_counts / binary_search_eer) instead", n, cap));
  }
  std::vector<double> genuine(n);
  std::vector<double> impostor(n * (n - 1));

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(n); ++ip) {
    const auto i = static_cast<std::size_t>(ip);
    genuine[i] = model.score(i, i);
    double* row = impostor.data() + i * (n - 1);
    std::size_t w = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      row[w++] = model.score(i, j);
    }
  }
  return {std::move(genuine), std::move(impostor)};
}

void dump_scores_csv(const ScoreModel& model, std::ostream& out) {
  const std::size_t n = model.subjects();
  if (n > 1000) throw DataError("score dump is limited to n <= 1000");
  out << "row,col,score,label\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out << i << ',' << j << ',' << fmt::format("{:.17g}", model.score(i, j)) << ','
          << (i == j ? "genuine" : "impostor") << '\n';
    }
  }
}

}  // namespace eerkit
