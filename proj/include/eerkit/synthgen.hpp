#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "eerkit/feature_matrix.hpp"

namespace eerkit {

/// Synthetic feature set with one target ICC shared by all features.
struct SynthSpec {
  std::size_t n_subjects = 0;
  std::size_t n_features = 0;
  double icc_target = 0.0;  // in (0, 1]; 0 is rejected (noise sd diverges)
  std::uint64_t seed = 0;
};

/// One ICC band: per-feature targets drawn uniformly from
/// [band_index/10, (band_index+1)/10).
struct BandSpec {
  int band_index = 0;  // 3..9
  double icc_low = 0.0;
  double icc_high = 0.0;
  std::size_t n_subjects = 0;
  std::size_t n_features = 0;
  std::uint64_t seed = 0;

  static BandSpec for_band(int band_index, std::size_t n_subjects, std::size_t n_features,
                           std::uint64_t seed);
};

struct BandResult {
  FeatureMatrix matrix;
  std::vector<double> feature_targets;
};

/// Base session values are i.i.d. standard normal, the second session copies
/// the first, independent noise with sd sqrt((1-ICC)/ICC) is added to both
/// sessions, and each feature is z-scored over the concatenated sessions.
/// Feature columns come from per-feature streams, so the result is identical
/// whether features are generated in parallel or not. Values are quantized to
/// 32-bit floats, matching the FMX1 container.
FeatureMatrix generate(const SynthSpec& spec);
FeatureMatrix generate_serial(const SynthSpec& spec);  // reference path, no OpenMP

BandResult generate_band(const BandSpec& spec);

/// Sidecar describing a generation run: seed, spec, per-feature targets,
/// toolkit version. Written as JSON next to the matrix file.
void write_metadata_sidecar(const std::filesystem::path& matrix_path, const SynthSpec& spec,
                            const std::vector<double>& feature_targets);
void write_metadata_sidecar(const std::filesystem::path& matrix_path, const BandSpec& spec,
                            const std::vector<double>& feature_targets);

}  // namespace eerkit
