#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eerkit/eer.hpp"
#include "eerkit/feature_matrix.hpp"
#include "eerkit/stats.hpp"
#include "eerkit/synthgen.hpp"

namespace eerkit {

enum class EerMethod { Auto, Exact, BinarySearch };

struct EerRunOptions {
  EerMethod method = EerMethod::Auto;
  std::size_t exact_cap = 2000;  // Auto picks the in-memory path up to here
  std::size_t batch_size = 1000;
  std::size_t stop_scores = 40;
  bool parallel = true;
};

struct EerOutcome {
  double eer = 0.0;  // fraction
  double threshold = 0.0;
  std::size_t passes = 0;
  std::uint64_t bracket_width_final = 0;
  bool used_binary_search = false;
};

/// EER of one prepared matrix, dispatching between the in-memory and the
/// batched binary-search path.
EerOutcome evaluate_eer(const FeatureMatrix& matrix, const EerRunOptions& options);

/// One repetition of any experiment. wall_ms is diagnostic only; everything
/// else is reproducible bit-exactly from the config.
struct RunRecord {
  std::string experiment;
  int band = 0;  // 0 where not applicable
  std::size_t n_features = 0;
  std::size_t n_subjects = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double eer_percent = 0.0;
  double threshold = 0.0;
  std::size_t passes = 0;
  double wall_ms = 0.0;
};

struct RunGroup {
  std::size_t n_subjects = 0;
  GroupSummary summary;  // over EER percent
  double se = 0.0;
  bool se_matched = true;
};

struct WelchPair {
  std::size_t subjects_a = 0;
  std::size_t subjects_b = 0;
  WelchResult result;
  /// Both groups had zero spread; t/df carry placeholders and p is 1 for
  /// equal means, 0 otherwise.
  bool degenerate = false;
};

// ---------------------------------------------------------------------------
// Experiment 1: features needed to hit EER targets.

struct Exp1Config {
  std::vector<std::size_t> subject_counts{1000, 10000};
  std::size_t feature_min = 1;
  std::size_t feature_max = 100;
  std::size_t reps = 20;
  std::vector<double> targets_percent{10.0, 5.0, 2.5, 1.0, 0.1, 0.01, 0.001, 0.0001, 0.0};
  /// Stop scanning feature counts once the smallest target is reached.
  bool stop_at_smallest_target = true;
  std::uint64_t seed = 1;
  EerRunOptions eer;
};

struct Exp1Result {
  /// min_features[target][subject_count]: smallest feature count whose
  /// maximum EER over all reps stayed at or below the target; empty when the
  /// scanned range never qualified.
  std::vector<std::vector<std::optional<std::size_t>>> min_features;
  std::vector<RunRecord> runs;
  std::vector<std::string> notes;  // non-monotone qualification events
};

Exp1Result run_exp1(const FeatureMatrix& source, const Exp1Config& cfg);

// ---------------------------------------------------------------------------
// Experiment 2: EER stability across subject counts, per ICC band.

/// Repeats runs until the running standard error drops to baseline_se,
/// starting the check at min_runs and giving up (flagged) at max_runs.
struct MatchSeResult {
  std::size_t count = 0;
  bool matched = false;
  std::vector<double> eers;
};

MatchSeResult match_se_replications(double baseline_se, std::size_t min_runs,
                                    std::size_t max_runs,
                                    const std::function<double(std::size_t)>& run_eer);

struct Exp2Cell {
  int band = 0;
  std::size_t n_features = 0;
};

struct Exp2Config {
  std::vector<Exp2Cell> cells{{3, 10}, {4, 10}, {5, 10}, {6, 10}, {7, 10}, {8, 10},
                              {9, 7},  {9, 8},  {9, 9},  {9, 10}, {9, 11}};
  std::vector<std::size_t> subject_counts{1000, 10000};  // ascending; last is the baseline
  std::size_t baseline_runs = 48;
  std::size_t min_runs = 8;
  std::size_t max_runs = 1000;
  std::size_t source_subjects = 100000;
  std::size_t source_features = 50;
  std::uint64_t seed = 1;
  EerRunOptions eer;
};

struct Exp2CellResult {
  int band = 0;
  std::size_t n_features = 0;
  std::vector<RunGroup> groups;  // one per subject count, ascending
  std::vector<WelchPair> welch_tests;
};

struct Exp2Result {
  std::vector<Exp2CellResult> cells;
  std::vector<RunRecord> runs;
};

Exp2Result run_exp2(const Exp2Config& cfg);

// ---------------------------------------------------------------------------
// Experiment 3: PCA verification pipeline on a real or stand-in corpus.

/// Low-rank stand-in corpus: per-subject latent coordinates spread along a
/// geometrically decaying basis, plus independent per-session noise. Used to
/// exercise the Experiment-3 pipeline when no real image corpus is available.
struct StandinSpec {
  std::size_t n_subjects = 13000;
  std::size_t dims = 12000;
  std::size_t rank = 150;
  double signal_strength = 1.9;
  double signal_decay = 0.99;
  double noise_sd = 1.0;
  std::uint64_t seed = 1;
};

FeatureMatrix generate_standin(const StandinSpec& spec);

struct Exp3Config {
  std::size_t train_subjects = 1000;  // leading subjects, session 1; excluded after the fit
  std::size_t n_components = 500;
  std::vector<std::size_t> feature_counts{3, 5, 9, 19, 85};  // leading components
  std::vector<std::size_t> subject_counts{1000, 10000};      // ascending; last is the baseline
  std::size_t runs_at_largest = 50;
  std::size_t min_runs = 8;
  std::size_t max_runs = 3000;
  std::uint64_t seed = 1;
  EerRunOptions eer;
};

struct Exp3CellResult {
  std::size_t n_features = 0;
  std::vector<RunGroup> groups;
  std::vector<WelchPair> welch_tests;
};

struct Exp3Result {
  std::vector<Exp3CellResult> cells;
  std::vector<RunRecord> runs;
};

Exp3Result run_exp3(const FeatureMatrix& corpus, const Exp3Config& cfg);

// ---------------------------------------------------------------------------
// Output files.

void write_runs_csv(const std::filesystem::path& path, const std::vector<RunRecord>& runs);
void write_exp1_outputs(const std::filesystem::path& dir, const Exp1Config& cfg,
                        const Exp1Result& result);
void write_exp2_outputs(const std::filesystem::path& dir, const Exp2Config& cfg,
                        const Exp2Result& result);
void write_exp3_outputs(const std::filesystem::path& dir, const Exp3Config& cfg,
                        const Exp3Result& result);

}  // namespace eerkit
