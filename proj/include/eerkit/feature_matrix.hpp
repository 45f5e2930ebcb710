#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace eerkit {

enum class MatrixFormat { Binary, Csv };

/// Random subject/feature subsetting request. Sampling is uniform without
/// replacement and fully determined by the seed.
struct SubsetRequest {
  std::size_t n_subjects = 0;
  std::size_t n_features = 0;
  std::uint64_t seed = 0;
};

/// Two-session feature measurements: n subjects x k features x 2 sessions.
/// Values are stored subject-major, feature-next, session-innermost, the
/// same order as the FMX1 container. Immutable after construction; safe to
/// share read-only across threads.
class FeatureMatrix {
 public:
  static constexpr std::size_t kSessions = 2;

  FeatureMatrix(std::size_t n_subjects, std::size_t n_features,
                std::vector<double> values, std::vector<std::string> subject_ids);

  std::size_t subjects() const noexcept { return n_; }
  std::size_t features() const noexcept { return k_; }
  std::size_t sessions() const noexcept { return kSessions; }

  double value(std::size_t subject, std::size_t feature, std::size_t session) const {
    return values_[(subject * k_ + feature) * kSessions + session];
  }
  double& value(std::size_t subject, std::size_t feature, std::size_t session) {
    return values_[(subject * k_ + feature) * kSessions + session];
  }

  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<std::string>& subject_ids() const noexcept { return subject_ids_; }

  /// Copies one session's feature vector for a subject into `out` (length k).
  void session_vector(std::size_t subject, std::size_t session, std::span<double> out) const;

 private:
  std::size_t n_;
  std::size_t k_;
  std::vector<double> values_;
  std::vector<std::string> subject_ids_;
};

/// Sequential ids "s0000000", "s0000001", ... used by the generators.
std::vector<std::string> sequential_subject_ids(std::size_t n);

FeatureMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
void store_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path,
                  MatrixFormat format);

/// Guesses Binary for ".fmx", Csv for ".csv"; anything else is an error.
MatrixFormat format_from_extension(const std::filesystem::path& path);

/// Standardizes each feature over the concatenated sessions to mean 0 and
/// sample standard deviation 1 (divisor n*s - 1).
FeatureMatrix zscore_features(const FeatureMatrix& matrix);

/// Uniform without-replacement sample of subjects and features. Both session
/// rows of a sampled subject come from the same source subject.
FeatureMatrix sample_subset(const FeatureMatrix& matrix, const SubsetRequest& req);

}  // namespace eerkit
