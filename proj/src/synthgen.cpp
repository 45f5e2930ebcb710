#include "eerkit/synthgen.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

#include "eerkit/error.hpp"
#include "eerkit/rng.hpp"
#include "eerkit/version.hpp"
#include "json.hpp"

namespace eerkit {

namespace {

void validate_common(std::size_t n, std::size_t k) {
  if (n < 1 || k < 1) throw DataError("generator needs at least 1 subject and 1 feature");
}

void validate_icc(double icc) {
  if (!(icc > 0.0) || icc > 1.0) {
    throw DataError(fmt::format("icc_target = {} outside (0, 1]", icc));
  }
}

float quantize(double v) { return static_cast<float>(v); }

/// Fills feature column j of `values` (layout (i*k + j)*2 + m) with one
/// Algorithm-1 feature, then standardizes it over the 2n concatenated values.
void fill_feature(std::vector<double>& values, std::size_t n, std::size_t k, std::size_t j,
                  double icc_target, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, {streams::kSynthFeature, j});
  const double noise_sd = std::sqrt((1.0 - icc_target) / icc_target);

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    const double x1 = z + noise_sd * rng.next_normal();
    const double x2 = z + noise_sd * rng.next_normal();
    values[(i * k + j) * 2] = x1;
    values[(i * k + j) * 2 + 1] = x2;
    sum += x1 + x2;
  }

  const double len = static_cast<double>(2 * n);
  const double mean = sum / len;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = values[(i * k + j) * 2] - mean;
    const double b = values[(i * k + j) * 2 + 1] - mean;
    ss += a * a + b * b;
  }
  const double sd = std::sqrt(ss / (len - 1.0));
  const double inv = 1.0 / sd;
  for (std::size_t i = 0; i < n; ++i) {
    values[(i * k + j) * 2] = quantize((values[(i * k + j) * 2] - mean) * inv);
    values[(i * k + j) * 2 + 1] = quantize((values[(i * k + j) * 2 + 1] - mean) * inv);
  }
}

FeatureMatrix generate_targets(std::size_t n, std::size_t k, std::uint64_t seed,
                               const std::vector<double>& targets, bool parallel) {
  std::vector<double> values(n * k * 2);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(k); ++j) {
      fill_feature(values, n, k, static_cast<std::size_t>(j), targets[static_cast<std::size_t>(j)],
                   seed);
    }
  } else {
    for (std::size_t j = 0; j < k; ++j) fill_feature(values, n, k, j, targets[j], seed);
  }
  return FeatureMatrix(n, k, std::move(values), sequential_subject_ids(n));
}

}  // namespace

BandSpec BandSpec::for_band(int band_index, std::size_t n_subjects, std::size_t n_features,
                            std::uint64_t seed) {
  BandSpec s;
  s.band_index = band_index;
  s.icc_low = band_index / 10.0;
  s.icc_high = (band_index + 1) / 10.0;
  s.n_subjects = n_subjects;
  s.n_features = n_features;
  s.seed = seed;
  return s;
}

FeatureMatrix generate(const SynthSpec& spec) {
  validate_common(spec.n_subjects, spec.n_features);
  validate_icc(spec.icc_target);
  std::vector<double> targets(spec.n_features, spec.icc_target);
  return generate_targets(spec.n_subjects, spec.n_features, spec.seed, targets, true);
}

FeatureMatrix generate_serial(const SynthSpec& spec) {
  validate_common(spec.n_subjects, spec.n_features);
  validate_icc(spec.icc_target);
  std::vector<double> targets(spec.n_features, spec.icc_target);
  return generate_targets(spec.n_subjects, spec.n_features, spec.seed, targets, false);
}

BandResult generate_band(const BandSpec& spec) {
  validate_common(spec.n_subjects, spec.n_features);
  if (spec.band_index < 3 || spec.band_index > 9) {
    throw DataError(fmt::format("band index {} outside 3..9", spec.band_index));
  }
  if (std::fabs(spec.icc_low - spec.band_index / 10.0) > 1e-12 ||
      std::fabs(spec.icc_high - (spec.band_index + 1) / 10.0) > 1e-12) {
    throw DataError(fmt::format("band {} bounds must be [{}, {}]", spec.band_index,
                                spec.band_index / 10.0, (spec.band_index + 1) / 10.0));
  }

  std::vector<double> targets(spec.n_features);
  for (std::size_t j = 0; j < spec.n_features; ++j) {
    Rng rng = Rng::stream(spec.seed, {streams::kBandTarget, j});
    targets[j] = rng.next_uniform(spec.icc_low, spec.icc_high);
  }
  FeatureMatrix m = generate_targets(spec.n_subjects, spec.n_features, spec.seed, targets, true);
  return BandResult{std::move(m), std::move(targets)};
}

namespace {

void write_sidecar(const std::filesystem::path& matrix_path, nlohmann::json spec_json,
                   std::uint64_t seed, const std::vector<double>& feature_targets) {
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["spec"] = std::move(spec_json);
  doc["feature_target_icc"] = feature_targets;
  doc["toolkit_version"] = kVersion;

  const auto out_path = matrix_path.string() + ".meta.json";
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", out_path));
  out << doc.dump(2) << '\n';
}

}  // namespace

void write_metadata_sidecar(const std::filesystem::path& matrix_path, const SynthSpec& spec,
                            const std::vector<double>& feature_targets) {
  nlohmann::json j{{"kind", "synth"},
                   {"n_subjects", spec.n_subjects},
                   {"n_features", spec.n_features},
                   {"icc_target", spec.icc_target}};
  write_sidecar(matrix_path, std::move(j), spec.seed, feature_targets);
}

void write_metadata_sidecar(const std::filesystem::path& matrix_path, const BandSpec& spec,
                            const std::vector<double>& feature_targets) {
  nlohmann::json j{{"kind", "band"},
                   {"band_index", spec.band_index},
                   {"icc_low", spec.icc_low},
                   {"icc_high", spec.icc_high},
                   {"n_subjects", spec.n_subjects},
                   {"n_features", spec.n_features}};
  write_sidecar(matrix_path, std::move(j), spec.seed, feature_targets);
}

}  // namespace eerkit
