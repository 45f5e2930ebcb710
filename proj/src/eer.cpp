#include "eerkit/eer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "eerkit/error.hpp"

namespace eerkit {

namespace {

struct Candidate {
  double threshold;
  double far;
  double frr;
  double d() const { return far - frr; }
};

EerResult interpolate_crossing(const Candidate& a, const Candidate& b) {
  // d is non-increasing; a.d() > 0 >= b.d().
  const double da = a.d(), db = b.d();
  const double frac = da / (da - db);
  EerResult r;
  r.threshold = a.threshold + (b.threshold - a.threshold) * frac;
  const double far = a.far + (b.far - a.far) * frac;
  const double frr = a.frr + (b.frr - a.frr) * frac;
  r.eer = 0.5 * (far + frr);
  return r;
}

EerResult eer_from_candidates(const std::vector<Candidate>& cands) {
  // Walk to the sign change. The first candidate has d = +1 and the last
  // d = -1 when candidates span the full range; bracket-restricted callers
  // may see no sign change, in which case the endpoint closest to zero wins.
  std::size_t first_nonpos = cands.size();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (cands[i].d() <= 0.0) {
      first_nonpos = i;
      break;
    }
  }
  EerResult r;
  if (first_nonpos == cands.size()) {
    const Candidate& c = cands.back();
    r.threshold = c.threshold;
    r.eer = 0.5 * (c.far + c.frr);
    return r;
  }
  if (first_nonpos == 0) {
    const Candidate& c = cands.front();
    r.threshold = c.threshold;
    r.eer = 0.5 * (c.far + c.frr);
    return r;
  }
  return interpolate_crossing(cands[first_nonpos - 1], cands[first_nonpos]);
}

}  // namespace

EerResult exact_eer(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty()) {
    throw DataError("exact_eer needs non-empty genuine and impostor score lists");
  }
  std::vector<double> gen(genuine.begin(), genuine.end());
  std::vector<double> imp(impostor.begin(), impostor.end());
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  const double ng = static_cast<double>(gen.size());
  const double ni = static_cast<double>(imp.size());

  const double vmin = std::min(gen.front(), imp.front());
  const double vmax = std::max(gen.back(), imp.back());

  std::vector<Candidate> cands;
  cands.push_back({vmin - 1.0, 1.0, 0.0});

  // Merge walk over distinct pooled values; after consuming all scores equal
  // to v, the counts hold for every threshold in [v, next_v), represented by
  // the midpoint candidate.
  std::size_t gi = 0, ii = 0;
  std::size_t gen_cum = 0, imp_cum = 0;
  while (gi < gen.size() || ii < imp.size()) {
    double v;
    if (gi < gen.size() && ii < imp.size()) {
      v = std::min(gen[gi], imp[ii]);
    } else if (gi < gen.size()) {
      v = gen[gi];
    } else {
      v = imp[ii];
    }
    while (gi < gen.size() && gen[gi] == v) ++gi, ++gen_cum;
    while (ii < imp.size() && imp[ii] == v) ++ii, ++imp_cum;

    double next_v;
    if (gi < gen.size() && ii < imp.size()) {
      next_v = std::min(gen[gi], imp[ii]);
    } else if (gi < gen.size()) {
      next_v = gen[gi];
    } else if (ii < imp.size()) {
      next_v = imp[ii];
    } else {
      next_v = vmax + 2.0;  // closing extreme
    }
    const double t = 0.5 * (v + next_v);
    cands.push_back({t, (ni - static_cast<double>(imp_cum)) / ni,
                     static_cast<double>(gen_cum) / ng});
  }

  EerResult r = eer_from_candidates(cands);
  r.lower = r.threshold;
  r.upper = r.threshold;
  return r;
}

std::vector<RocPoint> roc_curve(std::span<const double> genuine,
                                std::span<const double> impostor,
                                std::span<const double> grid) {
  if (genuine.empty() || impostor.empty()) {
    throw DataError("roc_curve needs non-empty genuine and impostor score lists");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw DataError("roc_curve grid must be sorted ascending");
  }
  std::vector<double> gen(genuine.begin(), genuine.end());
  std::vector<double> imp(impostor.begin(), impostor.end());
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());

  std::vector<RocPoint> points;
  points.reserve(grid.size());
  for (double t : grid) {
    const auto imp_le = static_cast<std::size_t>(
        std::upper_bound(imp.begin(), imp.end(), t) - imp.begin());
    const auto gen_le = static_cast<std::size_t>(
        std::upper_bound(gen.begin(), gen.end(), t) - gen.begin());
    points.push_back({t,
                      static_cast<double>(imp.size() - imp_le) / static_cast<double>(imp.size()),
                      static_cast<double>(gen_le) / static_cast<double>(gen.size())});
  }
  return points;
}

namespace {

EerResult finalize_bracket(const ScoreModel& model, const BinarySearchOptions& opts, double lo,
                           double hi, ThresholdCounts counts, std::size_t passes) {
  const double ng = static_cast<double>(model.genuine_count());
  const double ni = static_cast<double>(model.impostor_count());

  // One boundary pass pins the cumulative counts at the lower bound; every
  // score outside the bracket is <= lo or >= hi, so FAR/FRR at any bracket
  // value follows from these plus the collected scores.
  ThresholdQuery bq{lo, lo, hi, 0};
  const ThresholdCounts base =
      opts.parallel ? stream_counts(model, bq) : stream_counts_serial(model, bq);
  ++passes;

  EerResult result;
  result.passes = passes;
  result.lower = lo;
  result.upper = hi;
  result.bracket_width_final = counts.in_bracket;

  auto scores = std::move(counts.bracket_scores);
  std::sort(scores.begin(), scores.end(),
            [](const BracketScore& a, const BracketScore& b) { return a.score < b.score; });

  std::vector<Candidate> cands;
  cands.reserve(scores.size() + 1);
  // State for thresholds in (lo, first bracket score); equals the boundary
  // pass exactly at threshold = lo.
  cands.push_back({lo, static_cast<double>(base.impostors_above) / ni,
                   static_cast<double>(base.genuine_at_or_below) / ng});

  std::uint64_t imp_cum = 0, gen_cum = 0;
  std::size_t idx = 0;
  while (idx < scores.size()) {
    const double v = scores[idx].score;
    while (idx < scores.size() && scores[idx].score == v) {
      if (scores[idx].genuine) {
        ++gen_cum;
      } else {
        ++imp_cum;
      }
      ++idx;
    }
    cands.push_back({v, static_cast<double>(base.impostors_above - imp_cum) / ni,
                     static_cast<double>(base.genuine_at_or_below + gen_cum) / ng});
  }

  if (scores.empty()) {
    // Empty bracket: FAR and FRR are constant on (lo, hi).
    const Candidate& c = cands.front();
    result.eer = 0.5 * (c.far + c.frr);
    result.threshold = 0.5 * (lo + hi);
    return result;
  }

  const EerResult crossing = eer_from_candidates(cands);
  result.eer = crossing.eer;
  result.threshold = crossing.threshold;
  return result;
}

}  // namespace

EerResult binary_search_eer(const ScoreModel& model, const BinarySearchOptions& opts) {
  if (model.subjects() < 2) {
    throw DataError("binary_search_eer needs at least 2 subjects (no impostor scores otherwise)");
  }
  const double ng = static_cast<double>(model.genuine_count());
  const double ni = static_cast<double>(model.impostor_count());

  double lo = 0.0, hi = 1.0;
  std::size_t passes = 0;
  std::size_t stagnation = 0;
  std::uint64_t prev_in_bracket = std::numeric_limits<std::uint64_t>::max();

  for (;;) {
    const double mid = 0.5 * (lo + hi);
    ThresholdQuery q{mid, lo, hi, opts.stop_scores};
    ThresholdCounts c = opts.parallel ? stream_counts(model, q) : stream_counts_serial(model, q);
    ++passes;
    if (opts.trace) opts.trace->push_back({lo, hi, mid, c.in_bracket});

    if (c.in_bracket <= opts.stop_scores) {
      if (!c.bracket_scores_complete) {
        throw DataError("internal: final bracket collection incomplete");
      }
      return finalize_bracket(model, opts, lo, hi, std::move(c), passes);
    }

    const double far = static_cast<double>(c.impostors_above) / ni;
    const double frr = static_cast<double>(c.genuine_at_or_below) / ng;

    stagnation = (c.in_bracket == prev_in_bracket) ? stagnation + 1 : 0;
    prev_in_bracket = c.in_bracket;
    const bool exhausted = (mid == lo || mid == hi);  // fp midpoint degeneracy
    if (stagnation >= opts.stagnation_limit || exhausted) {
      // A tied mass of scores sits strictly inside the bounds and will never
      // leave the bracket; report d at the tied value (the midpoint has
      // converged onto it) and flag the tie.
      EerResult r;
      r.eer = 0.5 * (far + frr);
      r.threshold = mid;
      r.passes = passes;
      r.bracket_width_final = c.in_bracket;
      r.lower = lo;
      r.upper = hi;
      r.tie_fallback = true;
      return r;
    }

    if (frr > far) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
}

}  // namespace eerkit
