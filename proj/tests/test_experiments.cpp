#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "eerkit/error.hpp"
#include "eerkit/experiments.hpp"
#include "eerkit/rng.hpp"

using namespace eerkit;
namespace fs = std::filesystem;

TEST_CASE("evaluate_eer dispatches by population size") {
  const FeatureMatrix small = generate(SynthSpec{100, 6, 0.7, 1});
  EerRunOptions opts;
  opts.exact_cap = 150;
  CHECK_FALSE(evaluate_eer(small, opts).used_binary_search);
  opts.exact_cap = 50;
  CHECK(evaluate_eer(small, opts).used_binary_search);
  const EerOutcome forced = evaluate_eer(small, {EerMethod::BinarySearch, 150, 1000, 40, true});
  CHECK(forced.used_binary_search);
}

TEST_CASE("exact and binary search dispatch agree") {
  const FeatureMatrix m = generate(SynthSpec{300, 8, 0.55, 9});
  const double exact = evaluate_eer(m, {EerMethod::Exact, 2000, 1000, 40, true}).eer;
  const double bin = evaluate_eer(m, {EerMethod::BinarySearch, 2000, 1000, 40, true}).eer;
  CHECK(std::fabs(exact - bin) <= 5e-4);
}

TEST_CASE("exp1: a vacuous target needs one feature") {
  const BandResult src = generate_band(BandSpec::for_band(8, 1500, 12, 3));
  Exp1Config cfg;
  cfg.subject_counts = {400, 1000};
  cfg.feature_max = 12;
  cfg.reps = 3;
  cfg.targets_percent = {100.0, 40.0};
  cfg.seed = 5;
  const Exp1Result r = run_exp1(src.matrix, cfg);
  for (std::size_t sc = 0; sc < 2; ++sc) {
    REQUIRE(r.min_features[0][sc].has_value());
    CHECK(*r.min_features[0][sc] == 1);  // any EER satisfies 100%
    REQUIRE(r.min_features[1][sc].has_value());
  }
  CHECK_FALSE(r.runs.empty());
}

TEST_CASE("exp1 is reproducible bit-exactly") {
  const BandResult src = generate_band(BandSpec::for_band(8, 800, 6, 11));
  Exp1Config cfg;
  cfg.subject_counts = {300};
  cfg.feature_max = 4;
  cfg.reps = 2;
  cfg.targets_percent = {100.0};
  cfg.seed = 19;
  const Exp1Result a = run_exp1(src.matrix, cfg);
  const Exp1Result b = run_exp1(src.matrix, cfg);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].eer_percent == b.runs[i].eer_percent);
    CHECK(a.runs[i].seed == b.runs[i].seed);
    CHECK(a.runs[i].threshold == b.runs[i].threshold);
  }
}

TEST_CASE("exp1 validates its configuration") {
  const BandResult src = generate_band(BandSpec::for_band(8, 100, 4, 3));
  Exp1Config cfg;
  cfg.feature_max = 10;  // source has only 4
  CHECK_THROWS_AS(run_exp1(src.matrix, cfg), DataError);
  cfg.feature_max = 4;
  cfg.subject_counts = {500};  // source has only 100
  CHECK_THROWS_AS(run_exp1(src.matrix, cfg), DataError);
  cfg.subject_counts = {50};
  cfg.targets_percent = {1.0, 5.0};  // ascending: rejected
  CHECK_THROWS_AS(run_exp1(src.matrix, cfg), DataError);
}

TEST_CASE("match_se_replications stopping rules") {
  // zero-variance runs stop at the minimum count
  const MatchSeResult degenerate =
      match_se_replications(0.5, 8, 100, [](std::size_t) { return 3.0; });
  CHECK(degenerate.count == 8);
  CHECK(degenerate.matched);

  // matching variance stops near the baseline count
  Rng rng(1001);
  const double sigma = 0.4;
  const double baseline_se = sigma / std::sqrt(48.0);
  const MatchSeResult matched = match_se_replications(
      baseline_se, 8, 400, [&](std::size_t) { return 10.0 + sigma * rng.next_normal(); });
  CHECK(matched.matched);
  CHECK(matched.count >= 24);
  CHECK(matched.count <= 96);

  // exhaustion is flagged
  Rng rng2(7);
  const MatchSeResult exhausted = match_se_replications(
      1e-9, 8, 25, [&](std::size_t) { return rng2.next_normal(); });
  CHECK_FALSE(exhausted.matched);
  CHECK(exhausted.count == 25);

  // zero baseline is legal (degenerate lists); negative is not
  const MatchSeResult zero_base =
      match_se_replications(0.0, 8, 20, [](std::size_t) { return 2.5; });
  CHECK(zero_base.matched);
  CHECK(zero_base.count == 8);
  CHECK_THROWS_AS(match_se_replications(-1.0, 8, 10, [](std::size_t) { return 1.0; }), DataError);
}

TEST_CASE("exp2 smoke: harder bands score worse and output is reproducible") {
  Exp2Config cfg;
  cfg.cells = {{3, 4}, {8, 4}};
  cfg.subject_counts = {200, 600};
  cfg.baseline_runs = 6;
  cfg.min_runs = 4;
  cfg.max_runs = 24;
  cfg.source_subjects = 1500;
  cfg.source_features = 8;
  cfg.seed = 3;

  const Exp2Result r = run_exp2(cfg);
  REQUIRE(r.cells.size() == 2);
  const auto& band3 = r.cells[0];
  const auto& band8 = r.cells[1];
  REQUIRE(band3.groups.size() == 2);
  CHECK(band3.groups[1].summary.mean > band8.groups[1].summary.mean);
  CHECK(band3.welch_tests.size() == 1);
  CHECK(band3.welch_tests[0].result.p >= 0.0);
  CHECK(band3.welch_tests[0].result.p <= 1.0);
  CHECK(band3.groups[1].summary.n == 6);

  const Exp2Result again = run_exp2(cfg);
  REQUIRE(again.runs.size() == r.runs.size());
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    CHECK(again.runs[i].eer_percent == r.runs[i].eer_percent);
  }
}

TEST_CASE("standin corpus is deterministic with a controllable structure") {
  StandinSpec spec;
  spec.n_subjects = 50;
  spec.dims = 40;
  spec.rank = 10;
  spec.seed = 21;
  const FeatureMatrix a = generate_standin(spec);
  const FeatureMatrix b = generate_standin(spec);
  CHECK(a.values() == b.values());
  CHECK(a.subjects() == 50);
  CHECK(a.features() == 40);

  spec.noise_sd = 0.0;  // sessions collapse onto the shared signal
  const FeatureMatrix clean = generate_standin(spec);
  for (std::size_t i = 0; i < clean.subjects(); ++i) {
    for (std::size_t j = 0; j < clean.features(); ++j) {
      CHECK(clean.value(i, j, 0) == clean.value(i, j, 1));
    }
  }
}

TEST_CASE("exp3 on a noiseless corpus is perfect at every feature count") {
  StandinSpec spec;
  spec.n_subjects = 400;
  spec.dims = 60;
  spec.rank = 30;
  spec.noise_sd = 0.0;
  spec.seed = 4;
  const FeatureMatrix corpus = generate_standin(spec);

  Exp3Config cfg;
  cfg.train_subjects = 100;
  cfg.n_components = 20;
  cfg.feature_counts = {3, 20};
  cfg.subject_counts = {100, 250};
  cfg.runs_at_largest = 4;
  cfg.min_runs = 4;
  cfg.max_runs = 8;
  cfg.seed = 6;

  const Exp3Result r = run_exp3(corpus, cfg);
  for (const auto& cell : r.cells) {
    for (const auto& g : cell.groups) {
      CHECK(g.summary.mean == doctest::Approx(0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("exp3 EER falls as leading components are added") {
  StandinSpec spec;
  spec.n_subjects = 1200;
  spec.dims = 200;
  spec.rank = 40;
  spec.signal_strength = 4.0;
  spec.signal_decay = 0.95;
  spec.noise_sd = 1.0;
  spec.seed = 12;
  const FeatureMatrix corpus = generate_standin(spec);

  Exp3Config cfg;
  cfg.train_subjects = 200;
  cfg.n_components = 30;
  cfg.feature_counts = {3, 9, 25};
  cfg.subject_counts = {300, 800};
  cfg.runs_at_largest = 5;
  cfg.min_runs = 4;
  cfg.max_runs = 30;
  cfg.seed = 8;

  const Exp3Result r = run_exp3(corpus, cfg);
  REQUIRE(r.cells.size() == 3);
  CHECK(r.cells[0].groups[1].summary.mean > r.cells[1].groups[1].summary.mean);
  CHECK(r.cells[1].groups[1].summary.mean > r.cells[2].groups[1].summary.mean);
  for (const auto& cell : r.cells) {
    REQUIRE(cell.welch_tests.size() == 1);
  }
}

TEST_CASE("exp3 validates corpus capacity") {
  StandinSpec spec;
  spec.n_subjects = 120;
  spec.dims = 30;
  spec.rank = 5;
  const FeatureMatrix corpus = generate_standin(spec);
  Exp3Config cfg;
  cfg.train_subjects = 100;
  cfg.subject_counts = {100};  // 100 train + 100 eval > 120 subjects
  CHECK_THROWS_AS(run_exp3(corpus, cfg), DataError);
}

TEST_CASE("csv outputs land on disk") {
  const auto dir = fs::temp_directory_path() / "eerkit_exp_out";
  fs::remove_all(dir);

  Exp2Config cfg;
  cfg.cells = {{5, 3}};
  cfg.subject_counts = {100, 300};
  cfg.baseline_runs = 4;
  cfg.min_runs = 3;
  cfg.max_runs = 10;
  cfg.source_subjects = 600;
  cfg.source_features = 5;
  cfg.seed = 77;
  const Exp2Result r = run_exp2(cfg);
  write_exp2_outputs(dir, cfg, r);

  CHECK(fs::exists(dir / "runs.csv"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "tests.csv"));
  CHECK(fs::exists(dir / "fig3.csv"));

  std::ifstream runs(dir / "runs.csv");
  std::string header;
  std::getline(runs, header);
  CHECK(header ==
        "experiment,band,n_features,n_subjects,rep,seed,eer_percent,threshold,passes,wall_ms");
  fs::remove_all(dir);
}
