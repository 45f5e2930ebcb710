#include "eerkit/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include "eerkit/error.hpp"
#include "eerkit/pca.hpp"
#include "eerkit/rng.hpp"
#include "eerkit/scoring.hpp"

namespace eerkit {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  return Rng::stream(master, tags).next_u64();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

WelchPair make_welch_pair(std::size_t subjects_a, std::size_t subjects_b,
                          const std::vector<double>& eers_a, const std::vector<double>& eers_b) {
  const GroupSummary a = summarize(eers_a);
  const GroupSummary b = summarize(eers_b);
  WelchPair pair{subjects_a, subjects_b, {}, false};
  if (a.sd == 0.0 && b.sd == 0.0) {
    pair.degenerate = true;
    pair.result.t = 0.0;
    pair.result.df = static_cast<double>(a.n + b.n - 2);
    pair.result.p = (a.mean == b.mean) ? 1.0 : 0.0;
    return pair;
  }
  pair.result = welch_t(a, b);
  return pair;
}

}  // namespace

EerOutcome evaluate_eer(const FeatureMatrix& matrix, const EerRunOptions& options) {
  const bool use_binsearch =
      options.method == EerMethod::BinarySearch ||
      (options.method == EerMethod::Auto && matrix.subjects() > options.exact_cap);

  ScoreModel model(matrix, options.batch_size);
  EerOutcome out;
  if (use_binsearch) {
    BinarySearchOptions bso;
    bso.stop_scores = options.stop_scores;
    bso.parallel = options.parallel;
    const EerResult r = binary_search_eer(model, bso);
    out.eer = r.eer;
    out.threshold = r.threshold;
    out.passes = r.passes;
    out.bracket_width_final = r.bracket_width_final;
    out.used_binary_search = true;
  } else {
    // the exact path keeps the in-memory guard even when forced explicitly
    const auto [genuine, impostor] = all_scores(model);
    const EerResult r = exact_eer(genuine, impostor);
    out.eer = r.eer;
    out.threshold = r.threshold;
    out.passes = r.passes;
    out.used_binary_search = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment 1

Exp1Result run_exp1(const FeatureMatrix& source, const Exp1Config& cfg) {
  if (cfg.reps < 1) throw DataError("exp1 needs reps >= 1");
  if (cfg.feature_min < 1 || cfg.feature_min > cfg.feature_max) {
    throw DataError("exp1 feature range is empty");
  }
  if (cfg.feature_max > source.features()) {
    throw DataError(fmt::format("exp1 needs {} features, source has {}", cfg.feature_max,
                                source.features()));
  }
  if (!std::is_sorted(cfg.targets_percent.rbegin(), cfg.targets_percent.rend())) {
    throw DataError("exp1 targets must be sorted descending");
  }
  for (std::size_t n : cfg.subject_counts) {
    if (n > source.subjects()) {
      throw DataError(fmt::format("exp1 needs {} subjects, source has {}", n,
                                  source.subjects()));
    }
  }

  Exp1Result result;
  result.min_features.assign(cfg.targets_percent.size(),
                             std::vector<std::optional<std::size_t>>(cfg.subject_counts.size()));

  for (std::size_t sc = 0; sc < cfg.subject_counts.size(); ++sc) {
    const std::size_t n_subjects = cfg.subject_counts[sc];
    for (std::size_t f = cfg.feature_min; f <= cfg.feature_max; ++f) {
      double max_eer = 0.0;
      for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
        const std::uint64_t seed =
            derive_seed(cfg.seed, {streams::kExperimentRun, 1, sc, f, rep});
        const auto start = std::chrono::steady_clock::now();
        const FeatureMatrix subset = sample_subset(source, {n_subjects, f, seed});
        const EerOutcome o = evaluate_eer(subset, cfg.eer);
        max_eer = std::max(max_eer, o.eer);
        result.runs.push_back({"exp1", 0, f, n_subjects, rep, seed, o.eer * 100.0, o.threshold,
                               o.passes, elapsed_ms(start)});
      }
      const double max_eer_percent = max_eer * 100.0;
      for (std::size_t t = 0; t < cfg.targets_percent.size(); ++t) {
        auto& slot = result.min_features[t][sc];
        if (!slot && max_eer_percent <= cfg.targets_percent[t]) {
          slot = f;
        } else if (slot && max_eer_percent > cfg.targets_percent[t]) {
          result.notes.push_back(fmt::format(
              "non-monotone: target {}% first met at {} features but exceeded again at {} "
              "features (n={})",
              cfg.targets_percent[t], *slot, f, n_subjects));
        }
      }
      if (cfg.stop_at_smallest_target &&
          result.min_features.back()[sc].has_value()) {
        break;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Experiment 2

MatchSeResult match_se_replications(double baseline_se, std::size_t min_runs,
                                    std::size_t max_runs,
                                    const std::function<double(std::size_t)>& run_eer) {
  // A zero baseline is legitimate (degenerate EER lists have zero spread);
  // only garbage is rejected.
  if (!(baseline_se >= 0.0)) throw DataError("match_se_replications needs baseline_se >= 0");
  if (min_runs < 2) min_runs = 2;
  if (max_runs < min_runs) throw DataError("match_se_replications: max_runs < min_runs");

  MatchSeResult result;
  while (result.eers.size() < max_runs) {
    result.eers.push_back(run_eer(result.eers.size()));
    if (result.eers.size() >= min_runs) {
      if (standard_error(result.eers) <= baseline_se) {
        result.matched = true;
        break;
      }
    }
  }
  result.count = result.eers.size();
  return result;
}

namespace {

struct CellRunner {
  const FeatureMatrix& source;
  const Exp2Config& cfg;
  int band;
  std::size_t n_features;
  std::vector<RunRecord>* runs;

  double operator()(std::size_t n_subjects, std::size_t rep) const {
    const std::uint64_t seed = derive_seed(
        cfg.seed, {streams::kExperimentRun, 2, static_cast<std::uint64_t>(band), n_features,
                   n_subjects, rep});
    const auto start = std::chrono::steady_clock::now();
    const FeatureMatrix subset = sample_subset(source, {n_subjects, n_features, seed});
    const EerOutcome o = evaluate_eer(subset, cfg.eer);
    runs->push_back({"exp2", band, n_features, n_subjects, rep, seed, o.eer * 100.0, o.threshold,
                     o.passes, elapsed_ms(start)});
    return o.eer * 100.0;
  }
};

}  // namespace

Exp2Result run_exp2(const Exp2Config& cfg) {
  if (cfg.subject_counts.empty() || !std::is_sorted(cfg.subject_counts.begin(),
                                                    cfg.subject_counts.end())) {
    throw DataError("exp2 subject_counts must be ascending");
  }
  if (cfg.baseline_runs < 2) throw DataError("exp2 baseline_runs must be >= 2");

  Exp2Result result;

  // Band sources are expensive; build each once and share across cells.
  std::map<int, FeatureMatrix> sources;
  for (const auto& cell : cfg.cells) {
    if (sources.find(cell.band) == sources.end()) {
      const std::uint64_t band_seed =
          derive_seed(cfg.seed, {streams::kExperimentRun, 20, static_cast<std::uint64_t>(cell.band)});
      BandSpec spec = BandSpec::for_band(cell.band, cfg.source_subjects, cfg.source_features,
                                         band_seed);
      sources.emplace(cell.band, generate_band(spec).matrix);
    }
  }

  for (const auto& cell : cfg.cells) {
    const FeatureMatrix& source = sources.at(cell.band);
    if (cell.n_features > source.features()) {
      throw DataError(fmt::format("band {} source has {} features, cell needs {}", cell.band,
                                  source.features(), cell.n_features));
    }
    CellRunner runner{source, cfg, cell.band, cell.n_features, &result.runs};

    Exp2CellResult cr;
    cr.band = cell.band;
    cr.n_features = cell.n_features;
    cr.groups.resize(cfg.subject_counts.size());

    // Baseline at the largest subject count.
    const std::size_t baseline_n = cfg.subject_counts.back();
    std::vector<double> baseline_eers;
    baseline_eers.reserve(cfg.baseline_runs);
    for (std::size_t rep = 0; rep < cfg.baseline_runs; ++rep) {
      baseline_eers.push_back(runner(baseline_n, rep));
    }
    const double baseline_se = standard_error(baseline_eers);
    auto& baseline_group = cr.groups.back();
    baseline_group.n_subjects = baseline_n;
    baseline_group.summary = summarize(baseline_eers);
    baseline_group.se = baseline_se;
    baseline_group.se_matched = true;

    std::vector<std::vector<double>> group_eers(cfg.subject_counts.size());
    group_eers.back() = baseline_eers;

    for (std::size_t g = 0; g + 1 < cfg.subject_counts.size(); ++g) {
      const std::size_t n_subjects = cfg.subject_counts[g];
      MatchSeResult m = match_se_replications(
          baseline_se, cfg.min_runs, cfg.max_runs,
          [&](std::size_t rep) { return runner(n_subjects, rep); });
      auto& group = cr.groups[g];
      group.n_subjects = n_subjects;
      group.summary = summarize(m.eers);
      group.se = standard_error(m.eers);
      group.se_matched = m.matched;
      group_eers[g] = std::move(m.eers);
    }

    for (std::size_t a = 0; a < cfg.subject_counts.size(); ++a) {
      for (std::size_t b = a + 1; b < cfg.subject_counts.size(); ++b) {
        cr.welch_tests.push_back(make_welch_pair(cfg.subject_counts[a], cfg.subject_counts[b],
                                                 group_eers[a], group_eers[b]));
      }
    }
    result.cells.push_back(std::move(cr));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Experiment 3

FeatureMatrix generate_standin(const StandinSpec& spec) {
  if (spec.n_subjects < 2 || spec.dims < 2 || spec.rank < 1) {
    throw DataError("standin: need at least 2 subjects, 2 dims, rank 1");
  }
  if (spec.rank > spec.dims) throw DataError("standin: rank exceeds dims");
  if (!(spec.noise_sd >= 0.0)) throw DataError("standin: negative noise sd");

  const std::size_t n = spec.n_subjects, d = spec.dims, r = spec.rank;

  // Basis rows are scaled inline: row l carries sd signal_strength * decay^l.
  std::vector<double> basis(r * d);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t l = 0; l < static_cast<std::ptrdiff_t>(r); ++l) {
    Rng rng = Rng::stream(spec.seed, {streams::kStandinBasis, static_cast<std::uint64_t>(l)});
    const double scale = spec.signal_strength *
                         std::pow(spec.signal_decay, static_cast<double>(l)) /
                         std::sqrt(static_cast<double>(d));
    for (std::size_t c = 0; c < d; ++c) {
      basis[static_cast<std::size_t>(l) * d + c] = scale * rng.next_normal();
    }
  }

  std::vector<double> values(n * d * 2);
#pragma omp parallel
  {
    std::vector<double> signal(d);
    std::vector<double> latents(r);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(n); ++ip) {
      const auto i = static_cast<std::size_t>(ip);
      Rng lat_rng = Rng::stream(spec.seed, {streams::kStandinLatent, i});
      for (std::size_t l = 0; l < r; ++l) latents[l] = lat_rng.next_normal();

      std::fill(signal.begin(), signal.end(), 0.0);
      for (std::size_t l = 0; l < r; ++l) {
        const double c = latents[l];
        const double* brow = basis.data() + l * d;
#pragma omp simd
        for (std::size_t col = 0; col < d; ++col) signal[col] += c * brow[col];
      }

      for (std::size_t m = 0; m < 2; ++m) {
        Rng noise_rng = Rng::stream(spec.seed, {streams::kStandinNoise, i, m});
        for (std::size_t col = 0; col < d; ++col) {
          const double v = signal[col] + spec.noise_sd * noise_rng.next_normal();
          values[(i * d + col) * 2 + m] = static_cast<double>(static_cast<float>(v));
        }
      }
    }
  }
  return FeatureMatrix(n, d, std::move(values), sequential_subject_ids(n));
}

Exp3Result run_exp3(const FeatureMatrix& corpus, const Exp3Config& cfg) {
  if (cfg.subject_counts.empty() || !std::is_sorted(cfg.subject_counts.begin(),
                                                    cfg.subject_counts.end())) {
    throw DataError("exp3 subject_counts must be ascending");
  }
  const std::size_t n_total = corpus.subjects();
  const std::size_t d = corpus.features();
  const std::size_t max_eval = cfg.subject_counts.back();
  if (n_total < cfg.train_subjects + max_eval) {
    throw DataError(fmt::format("exp3 needs {} training + {} evaluation subjects, corpus has {}",
                                cfg.train_subjects, max_eval, n_total));
  }
  const std::size_t max_fc =
      *std::max_element(cfg.feature_counts.begin(), cfg.feature_counts.end());
  if (cfg.n_components < max_fc) {
    throw DataError(fmt::format("exp3 keeps {} components but needs {}", cfg.n_components,
                                max_fc));
  }

  // Fit on the first train_subjects session-1 rows, then drop them from the
  // evaluation population.
  Eigen::MatrixXd train(static_cast<Eigen::Index>(cfg.train_subjects),
                        static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < cfg.train_subjects; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      train(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = corpus.value(i, j, 0);
    }
  }
  const PcaModel model = fit_pca(train, cfg.n_components);

  const std::size_t n_eval = n_total - cfg.train_subjects;
  Eigen::MatrixXd eval1(static_cast<Eigen::Index>(n_eval), static_cast<Eigen::Index>(d));
  Eigen::MatrixXd eval2(static_cast<Eigen::Index>(n_eval), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n_eval; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      eval1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          corpus.value(cfg.train_subjects + i, j, 0);
      eval2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          corpus.value(cfg.train_subjects + i, j, 1);
    }
  }
  const Eigen::MatrixXd comp1 = pca_transform(model, eval1);
  const Eigen::MatrixXd comp2 = pca_transform(model, eval2);

  std::vector<std::string> eval_ids(corpus.subject_ids().begin() +
                                        static_cast<std::ptrdiff_t>(cfg.train_subjects),
                                    corpus.subject_ids().end());
  const FeatureMatrix components =
      zscore_components(sessions_to_matrix(comp1, comp2, std::move(eval_ids)));

  Exp3Result result;
  for (const std::size_t fc : cfg.feature_counts) {
    // Leading components only; feature selection is never random here.
    std::vector<double> vals(n_eval * fc * 2);
    for (std::size_t i = 0; i < n_eval; ++i) {
      for (std::size_t j = 0; j < fc; ++j) {
        vals[(i * fc + j) * 2] = components.value(i, j, 0);
        vals[(i * fc + j) * 2 + 1] = components.value(i, j, 1);
      }
    }
    const FeatureMatrix leading(n_eval, fc, std::move(vals), components.subject_ids());

    auto run_one = [&](std::size_t n_subjects, std::size_t rep) {
      const std::uint64_t seed =
          derive_seed(cfg.seed, {streams::kExperimentRun, 3, fc, n_subjects, rep});
      const auto start = std::chrono::steady_clock::now();
      const FeatureMatrix subset = sample_subset(leading, {n_subjects, fc, seed});
      const EerOutcome o = evaluate_eer(subset, cfg.eer);
      result.runs.push_back({"exp3", 0, fc, n_subjects, rep, seed, o.eer * 100.0, o.threshold,
                             o.passes, elapsed_ms(start)});
      return o.eer * 100.0;
    };

    Exp3CellResult cr;
    cr.n_features = fc;
    cr.groups.resize(cfg.subject_counts.size());

    const std::size_t baseline_n = cfg.subject_counts.back();
    std::vector<double> baseline_eers;
    for (std::size_t rep = 0; rep < cfg.runs_at_largest; ++rep) {
      baseline_eers.push_back(run_one(baseline_n, rep));
    }
    const double baseline_se = standard_error(baseline_eers);
    cr.groups.back() = {baseline_n, summarize(baseline_eers), baseline_se, true};

    std::vector<std::vector<double>> group_eers(cfg.subject_counts.size());
    group_eers.back() = baseline_eers;
    for (std::size_t g = 0; g + 1 < cfg.subject_counts.size(); ++g) {
      const std::size_t n_subjects = cfg.subject_counts[g];
      MatchSeResult m = match_se_replications(
          baseline_se, cfg.min_runs, cfg.max_runs,
          [&](std::size_t rep) { return run_one(n_subjects, rep); });
      cr.groups[g] = {n_subjects, summarize(m.eers), standard_error(m.eers), m.matched};
      group_eers[g] = std::move(m.eers);
    }

    for (std::size_t a = 0; a < cfg.subject_counts.size(); ++a) {
      for (std::size_t b = a + 1; b < cfg.subject_counts.size(); ++b) {
        cr.welch_tests.push_back(make_welch_pair(cfg.subject_counts[a], cfg.subject_counts[b],
                                                 group_eers[a], group_eers[b]));
      }
    }
    result.cells.push_back(std::move(cr));
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV outputs

void write_runs_csv(const std::filesystem::path& path, const std::vector<RunRecord>& runs) {
  auto out = open_out(path);
  out << "experiment,band,n_features,n_subjects,rep,seed,eer_percent,threshold,passes,wall_ms\n";
  for (const auto& r : runs) {
    out << fmt::format("{},{},{},{},{},{},{:.6f},{:.12g},{},{:.3f}\n", r.experiment, r.band,
                       r.n_features, r.n_subjects, r.rep, r.seed, r.eer_percent, r.threshold,
                       r.passes, r.wall_ms);
  }
}

namespace {

void write_groups_and_tests(const std::filesystem::path& dir, const std::string& experiment,
                            const std::vector<std::tuple<int, std::size_t, const std::vector<RunGroup>*,
                                                         const std::vector<WelchPair>*>>& cells) {
  auto summary = open_out(dir / "summary.csv");
  summary << "experiment,band,n_features,n_subjects,runs,mean_eer,sd_eer,se_eer,se_matched\n";
  for (const auto& [band, fc, groups, tests] : cells) {
    for (const auto& g : *groups) {
      summary << fmt::format("{},{},{},{},{},{:.6f},{:.6f},{:.6f},{}\n", experiment, band, fc,
                             g.n_subjects, g.summary.n, g.summary.mean, g.summary.sd, g.se,
                             g.se_matched ? 1 : 0);
    }
  }
  auto tests_out = open_out(dir / "tests.csv");
  tests_out << "experiment,band,n_features,subjects_a,subjects_b,t,df,p\n";
  for (const auto& [band, fc, groups, tests] : cells) {
    for (const auto& w : *tests) {
      tests_out << fmt::format("{},{},{},{},{},{:.4f},{:.2f},{:.6f}\n", experiment, band, fc,
                               w.subjects_a, w.subjects_b, w.result.t, w.result.df, w.result.p);
    }
  }
}

}  // namespace

void write_exp1_outputs(const std::filesystem::path& dir, const Exp1Config& cfg,
                        const Exp1Result& result) {
  std::filesystem::create_directories(dir);
  write_runs_csv(dir / "runs.csv", result.runs);

  auto fig = open_out(dir / "fig2.csv");
  fig << "eer_target_percent,n_subjects,min_features,achieved\n";
  for (std::size_t t = 0; t < cfg.targets_percent.size(); ++t) {
    for (std::size_t sc = 0; sc < cfg.subject_counts.size(); ++sc) {
      const auto& v = result.min_features[t][sc];
      fig << fmt::format("{:.6g},{},{},{}\n", cfg.targets_percent[t], cfg.subject_counts[sc],
                         v ? fmt::format("{}", *v) : "not_achieved", v ? 1 : 0);
    }
  }
  if (!result.notes.empty()) {
    auto notes = open_out(dir / "notes.txt");
    for (const auto& n : result.notes) notes << n << '\n';
  }
}

void write_exp2_outputs(const std::filesystem::path& dir, const Exp2Config& cfg,
                        const Exp2Result& result) {
  std::filesystem::create_directories(dir);
  write_runs_csv(dir / "runs.csv", result.runs);

  std::vector<std::tuple<int, std::size_t, const std::vector<RunGroup>*,
                         const std::vector<WelchPair>*>> cells;
  for (const auto& c : result.cells) {
    cells.emplace_back(c.band, c.n_features, &c.groups, &c.welch_tests);
  }
  write_groups_and_tests(dir, "exp2", cells);

  // Figure analogs: band sweep at fixed features (fig3), band-9 feature sweep (fig4).
  auto fig3 = open_out(dir / "fig3.csv");
  fig3 << "band,n_subjects,mean_eer,sd_eer\n";
  auto fig4 = open_out(dir / "fig4.csv");
  fig4 << "n_features,n_subjects,mean_eer,sd_eer\n";
  for (const auto& c : result.cells) {
    for (const auto& g : c.groups) {
      if (c.band != 9) {
        fig3 << fmt::format("{},{},{:.6f},{:.6f}\n", c.band, g.n_subjects, g.summary.mean,
                            g.summary.sd);
      } else {
        fig4 << fmt::format("{},{},{:.6f},{:.6f}\n", c.n_features, g.n_subjects, g.summary.mean,
                            g.summary.sd);
      }
    }
  }
}

void write_exp3_outputs(const std::filesystem::path& dir, const Exp3Config& cfg,
                        const Exp3Result& result) {
  std::filesystem::create_directories(dir);
  write_runs_csv(dir / "runs.csv", result.runs);

  std::vector<std::tuple<int, std::size_t, const std::vector<RunGroup>*,
                         const std::vector<WelchPair>*>> cells;
  for (const auto& c : result.cells) {
    cells.emplace_back(0, c.n_features, &c.groups, &c.welch_tests);
  }
  write_groups_and_tests(dir, "exp3", cells);

  auto fig5 = open_out(dir / "fig5.csv");
  fig5 << "n_features,n_subjects,mean_eer,sd_eer\n";
  for (const auto& c : result.cells) {
    for (const auto& g : c.groups) {
      fig5 << fmt::format("{},{},{:.6f},{:.6f}\n", c.n_features, g.n_subjects, g.summary.mean,
                          g.summary.sd);
    }
  }
}

}  // namespace eerkit
