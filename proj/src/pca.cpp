#include "eerkit/pca.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "eerkit/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "PCA1 I/O assumes a little-endian host");

namespace eerkit {

namespace {

void fix_component_signs(Eigen::MatrixXd& components) {
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    Eigen::Index imax = 0;
    components.row(r).cwiseAbs().maxCoeff(&imax);
    if (components(r, imax) < 0.0) components.row(r) = -components.row(r);
  }
}

}  // namespace

PcaModel fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& training_rows, std::size_t k) {
  const auto r = static_cast<std::size_t>(training_rows.rows());
  const auto d = static_cast<std::size_t>(training_rows.cols());
  if (r < 2) throw DataError("fit_pca needs at least 2 training rows");
  if (k < 1 || k > std::min(r - 1, d)) {
    throw DataError(fmt::format("fit_pca: k = {} outside 1..min(r-1, d) = {}", k,
                                std::min(r - 1, d)));
  }

  PcaModel model;
  model.mean = training_rows.colwise().mean();
  const Eigen::MatrixXd centered = training_rows.rowwise() - model.mean.transpose();

  Eigen::VectorXd eigvals;
  if (d <= r) {
    // Covariance route: eigenvectors are the components directly.
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw DataError("fit_pca: eigensolver failed");
    model.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    eigvals.resize(static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
      const Eigen::Index src = static_cast<Eigen::Index>(d - 1 - c);  // ascending -> descending
      model.components.row(static_cast<Eigen::Index>(c)) = solver.eigenvectors().col(src).transpose();
      eigvals(static_cast<Eigen::Index>(c)) = solver.eigenvalues()(src);
    }
  } else {
    // Gram route for wide data: eigenvectors of X X^T lift to components via
    // v = X^T u / sigma.
    const Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw DataError("fit_pca: eigensolver failed");
    model.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    eigvals.resize(static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
      const Eigen::Index src = static_cast<Eigen::Index>(r - 1 - c);
      const double lambda = solver.eigenvalues()(src);
      if (!(lambda > 0.0)) {
        throw DataError(fmt::format(
            "fit_pca: component {} has no variance (training data rank deficient)", c));
      }
      const Eigen::VectorXd v = centered.transpose() * solver.eigenvectors().col(src) /
                                std::sqrt(lambda);
      model.components.row(static_cast<Eigen::Index>(c)) = v.transpose();
      eigvals(static_cast<Eigen::Index>(c)) = lambda;
    }
  }

  for (std::size_t c = 0; c < k; ++c) {
    if (!(eigvals(static_cast<Eigen::Index>(c)) >= -1e-9)) {
      throw DataError("fit_pca: negative eigenvalue, degenerate training data");
    }
    if (eigvals(static_cast<Eigen::Index>(c)) <= 0.0) {
      throw DataError(fmt::format(
          "fit_pca: component {} has zero variance; reduce k below the data rank", c));
    }
  }

  fix_component_signs(model.components);
  model.singular_values = eigvals.cwiseMax(0.0).cwiseSqrt();
  model.n_components_kept = k;
  return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model,
                              const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.dims()) {
    throw DataError(fmt::format("pca_transform: {} columns, model expects {}", rows.cols(),
                                model.dims()));
  }
  const std::size_t kept = std::min(model.n_components_kept, model.components_total());
  const Eigen::MatrixXd basis =
      model.components.topRows(static_cast<Eigen::Index>(kept)).transpose();  // d x kept

  Eigen::MatrixXd out(rows.rows(), static_cast<Eigen::Index>(kept));
  // Row-parallel projection keeps the per-row arithmetic identical no matter
  // how many threads run.
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out.row(i) = (rows.row(i) - model.mean.transpose()) * basis;
  }
  return out;
}

FeatureMatrix zscore_components(const FeatureMatrix& components) {
  return zscore_features(components);
}

FeatureMatrix sessions_to_matrix(const Eigen::Ref<const Eigen::MatrixXd>& session1,
                                 const Eigen::Ref<const Eigen::MatrixXd>& session2,
                                 std::vector<std::string> subject_ids) {
  if (session1.rows() != session2.rows() || session1.cols() != session2.cols()) {
    throw DataError("sessions_to_matrix: session shapes differ");
  }
  const auto n = static_cast<std::size_t>(session1.rows());
  const auto k = static_cast<std::size_t>(session1.cols());
  std::vector<double> values(n * k * 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      values[(i * k + j) * 2] = session1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      values[(i * k + j) * 2 + 1] =
          session2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return FeatureMatrix(n, k, std::move(values), std::move(subject_ids));
}

namespace {
constexpr char kPcaMagic[4] = {'P', 'C', 'A', '1'};
}

void save_pca(const PcaModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out.write(kPcaMagic, 4);
  const std::uint64_t d = model.dims();
  const std::uint64_t k = model.components_total();
  out.write(reinterpret_cast<const char*>(&d), 8);
  out.write(reinterpret_cast<const char*>(&k), 8);
  out.write(reinterpret_cast<const char*>(model.mean.data()),
            static_cast<std::streamsize>(d * sizeof(double)));
  for (std::uint64_t r = 0; r < k; ++r) {
    const Eigen::VectorXd row = model.components.row(static_cast<Eigen::Index>(r));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(d * sizeof(double)));
  }
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

PcaModel load_pca(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kPcaMagic, 4) != 0) {
    throw DataError(fmt::format("'{}' is not a PCA1 file", path.string()));
  }
  std::uint64_t d = 0, k = 0;
  in.read(reinterpret_cast<char*>(&d), 8);
  in.read(reinterpret_cast<char*>(&k), 8);
  if (!in || d == 0 || k == 0) throw DataError(fmt::format("'{}': bad header", path.string()));

  PcaModel model;
  model.mean.resize(static_cast<Eigen::Index>(d));
  in.read(reinterpret_cast<char*>(model.mean.data()),
          static_cast<std::streamsize>(d * sizeof(double)));
  model.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  std::vector<double> row(d);
  for (std::uint64_t r = 0; r < k; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(d * sizeof(double)));
    for (std::uint64_t c = 0; c < d; ++c) {
      model.components(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          row[c];
    }
  }
  if (!in) throw DataError(fmt::format("'{}': truncated", path.string()));
  model.n_components_kept = k;
  return model;
}

}  // namespace eerkit
