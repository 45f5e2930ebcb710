#pragma once

#include <Eigen/Core>
#include <filesystem>

#include "eerkit/feature_matrix.hpp"

namespace eerkit {

/// Principal-component basis fitted on a training split. Components are
/// orthonormal rows ordered by non-increasing singular value; each row's
/// largest-magnitude entry is made positive so the fit is fully determined.
struct PcaModel {
  Eigen::VectorXd mean;        // training mean, length d
  Eigen::MatrixXd components;  // k x d, one component per row
  std::size_t n_components_kept = 0;
  Eigen::VectorXd singular_values;  // diagnostics; empty after load_pca

  std::size_t dims() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t components_total() const { return static_cast<std::size_t>(components.rows()); }
};

/// Centers by the training mean and extracts the top-k principal directions.
/// Uses the Gram matrix of the centered rows when d > r, the covariance
/// otherwise; either way the result contract is the same. Requires
/// k <= min(r - 1, d).
PcaModel fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& training_rows, std::size_t k);

/// (rows - mean) projected onto the basis, truncated to n_components_kept.
Eigen::MatrixXd pca_transform(const PcaModel& model,
                              const Eigen::Ref<const Eigen::MatrixXd>& rows);

/// Per-component standardization over the evaluation population with both
/// sessions concatenated; same contract as zscore_features.
FeatureMatrix zscore_components(const FeatureMatrix& components);

/// PCA1 container: magic "PCA1", u64 d, u64 k, mean (f64), components
/// row-major (f64).
void save_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

/// Packs per-session component matrices (rows aligned by subject) into a
/// two-session FeatureMatrix.
FeatureMatrix sessions_to_matrix(const Eigen::Ref<const Eigen::MatrixXd>& session1,
                                 const Eigen::Ref<const Eigen::MatrixXd>& session2,
                                 std::vector<std::string> subject_ids);

}  // namespace eerkit
