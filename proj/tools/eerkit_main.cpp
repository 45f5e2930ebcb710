// Command-line front end: generation, EER evaluation, the three experiment
// drivers, statistics, and plot emission. Results go to stdout or --out as
// CSV; progress goes to stderr. Exit codes: 0 ok, 1 usage, 2 data error.

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "eerkit/eer.hpp"
#include "eerkit/error.hpp"
#include "eerkit/experiments.hpp"
#include "eerkit/feature_matrix.hpp"
#include "eerkit/pca.hpp"
#include "eerkit/rng.hpp"
#include "eerkit/scoring.hpp"
#include "eerkit/stats.hpp"
#include "eerkit/synthgen.hpp"
#include "eerkit/version.hpp"

#include <Eigen/Core>

namespace fs = std::filesystem;
using namespace eerkit;

namespace {

// ---------------------------------------------------------------------------
// key=value config files ('#' comments, comma-separated lists)

class Config {
 public:
  explicit Config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open config '{}'", path.string()));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
          throw DataError(fmt::format("config line {}: expected key=value", line_no));
        }
        continue;
      }
      values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  template <typename T>
  T num(const std::string& key, T fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_num<T>(key, it->second);
  }

  template <typename T>
  std::vector<T> list(const std::string& key, std::vector<T> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<T> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_num<T>(key, trim(item)));
    if (out.empty()) throw DataError(fmt::format("config key '{}' has an empty list", key));
    return out;
  }

 private:
  static std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  }

  template <typename T>
  static T parse_num(const std::string& key, const std::string& text) {
    try {
      if constexpr (std::is_floating_point_v<T>) {
        return static_cast<T>(std::stod(text));
      } else {
        return static_cast<T>(std::stoull(text));
      }
    } catch (const std::exception&) {
      throw DataError(fmt::format("config key '{}': cannot parse '{}'", key, text));
    }
  }

  std::map<std::string, std::string> values_;
};

EerRunOptions eer_options_from(const Config& cfg) {
  EerRunOptions opts;
  const std::string method = cfg.str("method", "auto");
  if (method == "exact") {
    opts.method = EerMethod::Exact;
  } else if (method == "binsearch") {
    opts.method = EerMethod::BinarySearch;
  } else if (method == "auto") {
    opts.method = EerMethod::Auto;
  } else {
    throw DataError(fmt::format("unknown method '{}'", method));
  }
  opts.exact_cap = cfg.num<std::size_t>("exact_cap", opts.exact_cap);
  opts.batch_size = cfg.num<std::size_t>("batch_size", opts.batch_size);
  opts.stop_scores = cfg.num<std::size_t>("bracket_cap", opts.stop_scores);
  return opts;
}

MatrixFormat format_for(const fs::path& path, bool csv_flag) {
  if (csv_flag) return MatrixFormat::Csv;
  return format_from_extension(path);
}

// ---------------------------------------------------------------------------
// commands

int cmd_generate(const std::string& out, std::size_t subjects, std::size_t features, double icc,
                 std::uint64_t seed, std::size_t sessions, bool csv) {
  if (sessions != 2) throw DataError("this toolkit generates exactly 2 sessions");
  const SynthSpec spec{subjects, features, icc, seed};
  const FeatureMatrix m = generate(spec);
  store_matrix(m, out, format_for(out, csv));
  write_metadata_sidecar(out, spec, std::vector<double>(features, icc));
  std::cerr << fmt::format("wrote {} ({} subjects x {} features x 2 sessions)\n", out, subjects,
                           features);
  return 0;
}

int cmd_band(const std::string& out, int band, std::size_t subjects, std::size_t features,
             std::uint64_t seed, bool csv) {
  const BandSpec spec = BandSpec::for_band(band, subjects, features, seed);
  const BandResult r = generate_band(spec);
  store_matrix(r.matrix, out, format_for(out, csv));
  write_metadata_sidecar(out, spec, r.feature_targets);
  std::cerr << fmt::format("wrote {} (band {}, {} subjects x {} features)\n", out, band, subjects,
                           features);
  return 0;
}

int cmd_icc_check(const std::string& in, bool per_feature, bool correlations) {
  const FeatureMatrix m = load_matrix(in, format_from_extension(in));
  const auto iccs = feature_iccs(m);
  std::vector<double> sorted = iccs;
  std::sort(sorted.begin(), sorted.end());

  if (per_feature) {
    std::cout << "feature,icc\n";
    for (std::size_t j = 0; j < iccs.size(); ++j) {
      std::cout << fmt::format("{},{:.6f}\n", j, iccs[j]);
    }
  }
  std::cout << "stat,value\n";
  std::cout << fmt::format("mean_icc,{:.6f}\n", mean(iccs));
  std::cout << fmt::format("median_icc,{:.6f}\n", sorted[sorted.size() / 2]);
  std::cout << fmt::format("min_icc,{:.6f}\n", sorted.front());
  std::cout << fmt::format("max_icc,{:.6f}\n", sorted.back());

  if (correlations) {
    // all-pairs inter-feature correlation over concatenated sessions
    const std::size_t n = m.subjects(), k = m.features();
    Eigen::MatrixXd cols(static_cast<Eigen::Index>(2 * n), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        cols(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(j)) = m.value(i, j, 0);
        cols(static_cast<Eigen::Index>(2 * i + 1), static_cast<Eigen::Index>(j)) =
            m.value(i, j, 1);
      }
    }
    const Eigen::RowVectorXd mu = cols.colwise().mean();
    cols.rowwise() -= mu;
    const Eigen::VectorXd norms = cols.colwise().norm();
    const Eigen::MatrixXd gram = cols.transpose() * cols;
    std::vector<double> abs_r;
    abs_r.reserve(k * (k - 1) / 2);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        const double denom = norms(static_cast<Eigen::Index>(a)) *
                             norms(static_cast<Eigen::Index>(b));
        abs_r.push_back(std::fabs(gram(static_cast<Eigen::Index>(a),
                                       static_cast<Eigen::Index>(b)) / denom));
      }
    }
    std::sort(abs_r.begin(), abs_r.end());
    std::cout << fmt::format("median_abs_r,{:.6f}\n", abs_r[abs_r.size() / 2]);
    std::cout << fmt::format("max_abs_r,{:.6f}\n", abs_r.back());
  }
  return 0;
}

int cmd_eer(const std::string& in, std::size_t subjects, std::size_t features,
            std::uint64_t seed, const std::string& method, std::size_t batch_size,
            std::size_t bracket_cap, const std::string& dump_path) {
  FeatureMatrix m = load_matrix(in, format_from_extension(in));
  if (subjects != 0 || features != 0) {
    const SubsetRequest req{subjects == 0 ? m.subjects() : subjects,
                            features == 0 ? m.features() : features, seed};
    m = sample_subset(m, req);
  }

  EerRunOptions opts;
  opts.batch_size = batch_size;
  opts.stop_scores = bracket_cap;
  if (method == "exact") {
    opts.method = EerMethod::Exact;
  } else if (method == "binsearch") {
    opts.method = EerMethod::BinarySearch;
  } else if (method != "auto") {
    throw DataError(fmt::format("unknown method '{}'", method));
  }

  if (!dump_path.empty()) {
    std::ofstream dump(dump_path, std::ios::trunc);
    if (!dump) throw DataError(fmt::format("cannot write '{}'", dump_path));
    dump_scores_csv(ScoreModel(m, batch_size), dump);
  }

  const EerOutcome o = evaluate_eer(m, opts);
  // configuration fingerprint for the result record
  const std::uint64_t spec_hash =
      Rng::stream(seed, {m.subjects(), m.features(), batch_size, bracket_cap,
                         static_cast<std::uint64_t>(o.used_binary_search)})
          .next_u64();
  std::cout << "eer_percent,threshold,method,passes,bracket_width_final,seed,spec_hash\n";
  std::cout << fmt::format("{:.6f},{:.12g},{},{},{},{},{:016x}\n", o.eer * 100.0, o.threshold,
                           o.used_binary_search ? "binsearch" : "exact", o.passes,
                           o.bracket_width_final, seed, spec_hash);
  return 0;
}

FeatureMatrix exp_source_matrix(const Config& cfg, std::uint64_t seed) {
  if (cfg.has("source")) {
    const std::string path = cfg.str("source", "");
    std::cerr << "loading source " << path << "\n";
    return load_matrix(path, format_from_extension(path));
  }
  const int band = cfg.num<int>("band", 8);
  const std::size_t ns = cfg.num<std::size_t>("source_subjects", 100000);
  const std::size_t kf = cfg.num<std::size_t>("source_features", 500);
  std::cerr << fmt::format("generating band-{} source ({} x {})\n", band, ns, kf);
  return generate_band(BandSpec::for_band(band, ns, kf, seed)).matrix;
}

int cmd_exp1(const std::string& config_path, const std::string& out_dir) {
  const Config cfg(config_path);
  Exp1Config ec;
  ec.seed = cfg.num<std::uint64_t>("seed", 1);
  ec.subject_counts = cfg.list<std::size_t>("subject_counts", ec.subject_counts);
  ec.feature_min = cfg.num<std::size_t>("feature_min", ec.feature_min);
  ec.feature_max = cfg.num<std::size_t>("feature_max", ec.feature_max);
  ec.reps = cfg.num<std::size_t>("reps", ec.reps);
  ec.targets_percent = cfg.list<double>("targets", ec.targets_percent);
  ec.stop_at_smallest_target = cfg.num<int>("stop_at_smallest", 1) != 0;
  ec.eer = eer_options_from(cfg);

  const std::uint64_t source_seed =
      cfg.num<std::uint64_t>("source_seed", Rng::stream(ec.seed, {0x5eed}).next_u64());
  const FeatureMatrix source = exp_source_matrix(cfg, source_seed);
  const Exp1Result r = run_exp1(source, ec);
  write_exp1_outputs(out_dir, ec, r);
  std::cerr << fmt::format("exp1 done: {} runs -> {}\n", r.runs.size(), out_dir);
  return 0;
}

int cmd_exp2(const std::string& config_path, const std::string& out_dir) {
  const Config cfg(config_path);
  Exp2Config ec;
  ec.seed = cfg.num<std::uint64_t>("seed", 1);
  ec.subject_counts = cfg.list<std::size_t>("subject_counts", ec.subject_counts);
  ec.baseline_runs = cfg.num<std::size_t>("baseline_runs", ec.baseline_runs);
  ec.min_runs = cfg.num<std::size_t>("min_runs", ec.min_runs);
  ec.max_runs = cfg.num<std::size_t>("max_runs", ec.max_runs);
  ec.source_subjects = cfg.num<std::size_t>("source_subjects", ec.source_subjects);
  ec.source_features = cfg.num<std::size_t>("source_features", ec.source_features);
  ec.eer = eer_options_from(cfg);

  ec.cells.clear();
  const auto bands = cfg.list<int>("bands", {3, 4, 5, 6, 7, 8});
  const std::size_t features = cfg.num<std::size_t>("features", 10);
  for (int b : bands) ec.cells.push_back({b, features});
  if (cfg.has("band9_features")) {
    for (std::size_t f : cfg.list<std::size_t>("band9_features", {})) ec.cells.push_back({9, f});
  }

  const Exp2Result r = run_exp2(ec);
  write_exp2_outputs(out_dir, ec, r);
  std::cerr << fmt::format("exp2 done: {} runs -> {}\n", r.runs.size(), out_dir);
  return 0;
}

int cmd_exp3(const std::string& config_path, const std::string& out_dir) {
  const Config cfg(config_path);
  Exp3Config ec;
  ec.seed = cfg.num<std::uint64_t>("seed", 1);
  ec.train_subjects = cfg.num<std::size_t>("train_subjects", ec.train_subjects);
  ec.n_components = cfg.num<std::size_t>("components", ec.n_components);
  ec.feature_counts = cfg.list<std::size_t>("feature_counts", ec.feature_counts);
  ec.subject_counts = cfg.list<std::size_t>("subject_counts", ec.subject_counts);
  ec.runs_at_largest = cfg.num<std::size_t>("runs_at_largest", ec.runs_at_largest);
  ec.min_runs = cfg.num<std::size_t>("min_runs", ec.min_runs);
  ec.max_runs = cfg.num<std::size_t>("max_runs", ec.max_runs);
  ec.eer = eer_options_from(cfg);

  FeatureMatrix corpus = [&] {
    if (cfg.has("corpus")) {
      const std::string path = cfg.str("corpus", "");
      std::cerr << "loading corpus " << path << "\n";
      return load_matrix(path, format_from_extension(path));
    }
    StandinSpec ss;
    ss.n_subjects = cfg.num<std::size_t>("standin_subjects", 12200);
    ss.dims = cfg.num<std::size_t>("standin_dims", 12000);
    ss.rank = cfg.num<std::size_t>("standin_rank", ss.rank);
    ss.signal_strength = cfg.num<double>("standin_signal", ss.signal_strength);
    ss.signal_decay = cfg.num<double>("standin_decay", ss.signal_decay);
    ss.noise_sd = cfg.num<double>("standin_noise", ss.noise_sd);
    ss.seed = cfg.num<std::uint64_t>("standin_seed", Rng::stream(ec.seed, {0xc0de}).next_u64());
    std::cerr << fmt::format("generating stand-in corpus ({} x {} dims, rank {})\n",
                             ss.n_subjects, ss.dims, ss.rank);
    return generate_standin(ss);
  }();

  const Exp3Result r = run_exp3(corpus, ec);
  write_exp3_outputs(out_dir, ec, r);
  std::cerr << fmt::format("exp3 done: {} runs -> {}\n", r.runs.size(), out_dir);
  return 0;
}

int cmd_pca_fit(const std::string& in, std::size_t train_rows, std::size_t components,
                const std::string& out) {
  const FeatureMatrix m = load_matrix(in, format_from_extension(in));
  if (train_rows == 0 || train_rows > m.subjects()) {
    throw DataError(fmt::format("train rows {} out of range (matrix has {} subjects)",
                                train_rows, m.subjects()));
  }
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(train_rows),
                       static_cast<Eigen::Index>(m.features()));
  for (std::size_t i = 0; i < train_rows; ++i) {
    for (std::size_t j = 0; j < m.features(); ++j) {
      rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.value(i, j, 0);
    }
  }
  const PcaModel model = fit_pca(rows, components);
  save_pca(model, out);
  std::cerr << fmt::format("fit {} components on {} rows -> {}\n", components, train_rows, out);
  return 0;
}

int cmd_pca_apply(const std::string& model_path, const std::string& in, const std::string& out,
                  std::size_t skip_subjects, bool zscore) {
  const PcaModel model = load_pca(model_path);
  const FeatureMatrix m = load_matrix(in, format_from_extension(in));
  if (skip_subjects >= m.subjects()) throw DataError("--skip-train leaves no subjects");
  const std::size_t n = m.subjects() - skip_subjects;
  const std::size_t d = m.features();

  Eigen::MatrixXd s1(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::MatrixXd s2(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      s1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m.value(skip_subjects + i, j, 0);
      s2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m.value(skip_subjects + i, j, 1);
    }
  }
  std::vector<std::string> ids(m.subject_ids().begin() +
                                   static_cast<std::ptrdiff_t>(skip_subjects),
                               m.subject_ids().end());
  FeatureMatrix components =
      sessions_to_matrix(pca_transform(model, s1), pca_transform(model, s2), std::move(ids));
  if (zscore) components = zscore_components(components);
  store_matrix(components, out, format_from_extension(out));
  std::cerr << fmt::format("projected {} subjects onto {} components -> {}\n", n,
                           components.features(), out);
  return 0;
}

int cmd_ttest(double mean1, double sd1, std::size_t n1, double mean2, double sd2,
              std::size_t n2) {
  const WelchResult r = welch_t({mean1, sd1, n1}, {mean2, sd2, n2});
  std::cout << "t,df,p\n";
  std::cout << fmt::format("{:.4f},{:.2f},{:.6f}\n", r.t, r.df, r.p);
  return 0;
}

// ---------------------------------------------------------------------------
// plot: CSV series -> standalone SVG

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

int cmd_plot(const std::string& in, const std::string& out, const std::string& x_col,
             const std::string& y_col, const std::string& series_col, bool logy) {
  std::ifstream csv(in);
  if (!csv) throw DataError(fmt::format("cannot open '{}'", in));
  std::string line;
  if (!std::getline(csv, line)) throw DataError("empty csv");

  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    return f;
  };
  const auto header = split(line);
  auto col = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(fmt::format("column '{}' not in {}", name, in));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xi = col(x_col), yi = col(y_col);
  const std::size_t si = series_col.empty() ? header.size() : col(series_col);

  std::map<std::string, Series> series;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() < header.size()) continue;
    const std::string key = series_col.empty() ? "series" : f[si];
    double x, y;
    try {
      x = std::stod(f[xi]);
      y = std::stod(f[yi]);
    } catch (const std::exception&) {
      continue;  // non-numeric cell (e.g. "not_achieved")
    }
    if (logy && y <= 0.0) continue;
    auto& s = series[key];
    s.label = key;
    s.points.emplace_back(x, logy ? std::log10(y) : y);
  }
  if (series.empty()) throw DataError("no plottable rows");

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (auto& [_, s] : series) {
    std::sort(s.points.begin(), s.points.end());
    for (auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;

  const double W = 720, H = 480, L = 70, R = 160, T = 30, B = 50;
  auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ofstream svg(out, std::ios::trunc);
  if (!svg) throw DataError(fmt::format("cannot write '{}'", out));
  svg << fmt::format("<svg xmlns='http://www.w3.org/2000/svg' width='{}' height='{}' "
                     "viewBox='0 0 {} {}'>\n", W, H, W, H);
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << fmt::format("<line x1='{}' y1='{}' x2='{}' y2='{}' stroke='black'/>\n", L, H - B, W - R,
                     H - B);
  svg << fmt::format("<line x1='{}' y1='{}' x2='{}' y2='{}' stroke='black'/>\n", L, T, L, H - B);
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    svg << fmt::format("<text x='{}' y='{}' font-size='11' text-anchor='middle'>{:.3g}</text>\n",
                       sx(fx), H - B + 18, fx);
    svg << fmt::format("<text x='{}' y='{}' font-size='11' text-anchor='end'>{}{:.3g}</text>\n",
                       L - 6, sy(fy) + 4, logy ? "1e" : "", fy);
  }
  svg << fmt::format("<text x='{}' y='{}' font-size='12' text-anchor='middle'>{}</text>\n",
                     (L + W - R) / 2, H - 12, x_col);
  svg << fmt::format(
      "<text x='16' y='{}' font-size='12' text-anchor='middle' transform='rotate(-90 16 {})'>"
      "{}{}</text>\n", (T + H - B) / 2, (T + H - B) / 2, y_col, logy ? " (log10)" : "");

  int ci = 0;
  for (const auto& [key, s] : series) {
    const char* color = colors[ci % 8];
    std::string path;
    for (const auto& [x, y] : s.points) {
      path += fmt::format("{}{:.2f},{:.2f} ", path.empty() ? "" : "", sx(x), sy(y));
    }
    svg << fmt::format("<polyline fill='none' stroke='{}' stroke-width='1.5' points='{}'/>\n",
                       color, path);
    for (const auto& [x, y] : s.points) {
      svg << fmt::format("<circle cx='{:.2f}' cy='{:.2f}' r='2.5' fill='{}'/>\n", sx(x), sy(y),
                         color);
    }
    svg << fmt::format("<text x='{}' y='{}' font-size='12' fill='{}'>{} = {}</text>\n",
                       W - R + 10, T + 16 + 16 * ci, color,
                       series_col.empty() ? "series" : series_col, key);
    ++ci;
  }
  svg << "</svg>\n";
  std::cerr << fmt::format("wrote {} ({} series)\n", out, series.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{fmt::format("eerkit {} - synthetic biometric feature sets and "
                           "equal-error-rate evaluation at scale", kVersion)};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (default: all cores)");

  // generate
  auto* gen = app.add_subcommand("generate", "synthesize a feature set with one target ICC");
  std::size_t g_subjects = 1000, g_features = 50, g_sessions = 2;
  double g_icc = 0.7;
  std::uint64_t g_seed = 1;
  std::string g_out;
  bool g_csv = false;
  gen->add_option("--subjects", g_subjects, "subject count")->required();
  gen->add_option("--features", g_features, "feature count")->required();
  gen->add_option("--icc", g_icc, "target ICC in (0,1]")->required();
  gen->add_option("--seed", g_seed, "master seed");
  gen->add_option("--sessions", g_sessions, "session count (must be 2)");
  gen->add_option("--out", g_out, "output file (.fmx or .csv)")->required();
  gen->add_flag("--csv", g_csv, "force CSV output");

  // band
  auto* band = app.add_subcommand("band", "synthesize one ICC band data set");
  int b_band = 8;
  std::size_t b_subjects = 100000, b_features = 50;
  std::uint64_t b_seed = 1;
  std::string b_out;
  bool b_csv = false;
  band->add_option("--band", b_band, "band index 3..9")->required();
  band->add_option("--subjects", b_subjects, "subject count");
  band->add_option("--features", b_features, "feature count");
  band->add_option("--seed", b_seed, "master seed");
  band->add_option("--out", b_out, "output file")->required();
  band->add_flag("--csv", b_csv, "force CSV output");

  // icc-check
  auto* icc = app.add_subcommand("icc-check", "estimate per-feature ICCs of a matrix");
  std::string i_in;
  bool i_per_feature = false, i_corr = false;
  icc->add_option("file", i_in, "matrix file")->required();
  icc->add_flag("--per-feature", i_per_feature, "emit one row per feature");
  icc->add_flag("--correlations", i_corr, "also report inter-feature |r| stats");

  // eer
  auto* eer = app.add_subcommand("eer", "equal error rate of a two-session matrix");
  std::string e_in, e_method = "auto", e_dump;
  std::size_t e_subjects = 0, e_features = 0, e_batch = 1000, e_cap = 40;
  std::uint64_t e_seed = 1;
  eer->add_option("file", e_in, "matrix file")->required();
  eer->add_option("--subjects", e_subjects, "random subject subset size (0 = all)");
  eer->add_option("--features", e_features, "random feature subset size (0 = all)");
  eer->add_option("--seed", e_seed, "subset seed");
  eer->add_option("--method", e_method, "exact | binsearch | auto");
  eer->add_option("--batch-size", e_batch, "session-1 subjects per streaming batch");
  eer->add_option("--bracket-cap", e_cap, "stop once this few scores sit between the bounds");
  eer->add_option("--dump-scores", e_dump, "debug score dump CSV (n <= 1000)");

  // experiments
  std::string x1_cfg, x1_out = "exp1_out";
  auto* exp1 = app.add_subcommand("exp1", "features needed to reach EER targets");
  exp1->add_option("--config", x1_cfg, "key=value config file")->required();
  exp1->add_option("--out", x1_out, "output directory");

  std::string x2_cfg, x2_out = "exp2_out";
  auto* exp2 = app.add_subcommand("exp2", "EER stability across subject counts, per band");
  exp2->add_option("--config", x2_cfg, "key=value config file")->required();
  exp2->add_option("--out", x2_out, "output directory");

  std::string x3_cfg, x3_out = "exp3_out";
  auto* exp3 = app.add_subcommand("exp3", "PCA verification pipeline on a corpus");
  exp3->add_option("--config", x3_cfg, "key=value config file")->required();
  exp3->add_option("--out", x3_out, "output directory");

  // pca
  auto* pfit = app.add_subcommand("pca-fit", "fit a PCA basis on leading session-1 rows");
  std::string pf_in, pf_out;
  std::size_t pf_rows = 1000, pf_comp = 500;
  pfit->add_option("--in", pf_in, "matrix file")->required();
  pfit->add_option("--train-rows", pf_rows, "training subjects (session 1)");
  pfit->add_option("--components", pf_comp, "components to keep");
  pfit->add_option("--out", pf_out, "model file")->required();

  auto* papply = app.add_subcommand("pca-apply", "project both sessions onto a PCA basis");
  std::string pa_model, pa_in, pa_out;
  std::size_t pa_skip = 0;
  bool pa_zscore = false;
  papply->add_option("--model", pa_model, "PCA1 model file")->required();
  papply->add_option("--in", pa_in, "matrix file")->required();
  papply->add_option("--out", pa_out, "output matrix file")->required();
  papply->add_option("--skip-train", pa_skip, "leading subjects to exclude");
  papply->add_flag("--zscore", pa_zscore, "z-score components over the output population");

  // ttest
  auto* tt = app.add_subcommand("ttest", "Welch's t-test from group summaries");
  double t_m1 = 0, t_s1 = 0, t_m2 = 0, t_s2 = 0;
  std::size_t t_n1 = 0, t_n2 = 0;
  tt->add_option("--mean1", t_m1)->required();
  tt->add_option("--sd1", t_s1)->required();
  tt->add_option("--n1", t_n1)->required();
  tt->add_option("--mean2", t_m2)->required();
  tt->add_option("--sd2", t_s2)->required();
  tt->add_option("--n2", t_n2)->required();

  // plot
  auto* plot = app.add_subcommand("plot", "render a fig*.csv as a standalone SVG");
  std::string pl_in, pl_out, pl_x, pl_y, pl_series;
  bool pl_logy = false;
  plot->add_option("--in", pl_in, "input CSV")->required();
  plot->add_option("--out", pl_out, "output SVG")->required();
  plot->add_option("--x", pl_x, "x column")->required();
  plot->add_option("--y", pl_y, "y column")->required();
  plot->add_option("--series", pl_series, "series column (one line per value)");
  plot->add_flag("--logy", pl_logy, "log10 y axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors are exit 1; --help is 0
  }

  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (gen->parsed()) return cmd_generate(g_out, g_subjects, g_features, g_icc, g_seed,
                                           g_sessions, g_csv);
    if (band->parsed()) return cmd_band(b_out, b_band, b_subjects, b_features, b_seed, b_csv);
    if (icc->parsed()) return cmd_icc_check(i_in, i_per_feature, i_corr);
    if (eer->parsed()) return cmd_eer(e_in, e_subjects, e_features, e_seed, e_method, e_batch,
                                      e_cap, e_dump);
    if (exp1->parsed()) return cmd_exp1(x1_cfg, x1_out);
    if (exp2->parsed()) return cmd_exp2(x2_cfg, x2_out);
    if (exp3->parsed()) return cmd_exp3(x3_cfg, x3_out);
    if (pfit->parsed()) return cmd_pca_fit(pf_in, pf_rows, pf_comp, pf_out);
    if (papply->parsed()) return cmd_pca_apply(pa_model, pa_in, pa_out, pa_skip, pa_zscore);
    if (tt->parsed()) return cmd_ttest(t_m1, t_s1, t_n1, t_m2, t_s2, t_n2);
    if (plot->parsed()) return cmd_plot(pl_in, pl_out, pl_x, pl_y, pl_series, pl_logy);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
