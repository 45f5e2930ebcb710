#include "eerkit/feature_matrix.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "eerkit/error.hpp"
#include "eerkit/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "FMX1 I/O assumes a little-endian host");

namespace eerkit {

namespace {

constexpr char kMagic[4] = {'F', 'M', 'X', '1'};

void check_unique_ids(const std::vector<std::string>& ids) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!seen.insert(ids[i]).second) {
      throw DataError(fmt::format("duplicate subject id '{}' at index {}", ids[i], i));
    }
  }
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t n_subjects, std::size_t n_features,
                             std::vector<double> values,
                             std::vector<std::string> subject_ids)
    : n_(n_subjects), k_(n_features), values_(std::move(values)),
      subject_ids_(std::move(subject_ids)) {
  if (n_ == 0 || k_ == 0) {
    throw DataError("feature matrix needs at least one subject and one feature");
  }
  if (values_.size() != n_ * k_ * kSessions) {
    throw DataError(fmt::format("value count {} does not match {}x{}x{}",
                                values_.size(), n_, k_, kSessions));
  }
  if (subject_ids_.size() != n_) {
    throw DataError(fmt::format("{} subject ids for {} subjects", subject_ids_.size(), n_));
  }
  check_unique_ids(subject_ids_);
  for (std::size_t idx = 0; idx < values_.size(); ++idx) {
    if (!std::isfinite(values_[idx])) {
      const std::size_t subject = idx / (k_ * kSessions);
      const std::size_t feature = (idx / kSessions) % k_;
      const std::size_t session = idx % kSessions;
      throw DataError(fmt::format(
          "non-finite value at subject {}, feature {}, session {}", subject, feature, session));
    }
  }
}

void FeatureMatrix::session_vector(std::size_t subject, std::size_t session,
                                   std::span<double> out) const {
  const double* base = values_.data() + subject * k_ * kSessions + session;
  for (std::size_t j = 0; j < k_; ++j) out[j] = base[j * kSessions];
}

std::vector<std::string> sequential_subject_ids(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(fmt::format("s{:07}", i));
  return ids;
}

MatrixFormat format_from_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".fmx") return MatrixFormat::Binary;
  if (ext == ".csv") return MatrixFormat::Csv;
  throw DataError(fmt::format("cannot infer matrix format from '{}'", path.string()));
}

namespace {

FeatureMatrix load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError(fmt::format("'{}' is not an FMX1 file (bad magic)", path.string()));
  }

  std::uint64_t n = 0, k = 0, s = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&k), 8);
  in.read(reinterpret_cast<char*>(&s), 8);
  if (!in) throw DataError(fmt::format("'{}': truncated header", path.string()));
  if (s != FeatureMatrix::kSessions) {
    throw DataError(fmt::format("'{}': s = {} sessions, this toolkit requires s = 2",
                                path.string(), s));
  }
  if (n == 0 || k == 0) {
    throw DataError(fmt::format("'{}': empty dimensions n={} k={}", path.string(), n, k));
  }

  const std::size_t count = static_cast<std::size_t>(n) * k * s;
  std::vector<float> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw DataError(fmt::format("'{}': truncated value block", path.string()));

  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(raw[i])) {
      const std::size_t subject = i / (k * s);
      const std::size_t feature = (i / s) % k;
      const std::size_t session = i % s;
      throw DataError(fmt::format("'{}': non-finite value at subject {}, feature {}, session {}",
                                  path.string(), subject, feature, session));
    }
    values[i] = static_cast<double>(raw[i]);
  }

  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string id;
    if (!std::getline(in, id, '\0')) {
      throw DataError(fmt::format("'{}': truncated id block ({} of {} ids)", path.string(), i, n));
    }
    ids.push_back(std::move(id));
  }
  return FeatureMatrix(n, k, std::move(values), std::move(ids));
}

void store_binary(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));

  out.write(kMagic, 4);
  const std::uint64_t n = m.subjects(), k = m.features(), s = m.sessions();
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&k), 8);
  out.write(reinterpret_cast<const char*>(&s), 8);

  const auto& values = m.values();
  std::vector<float> raw(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) raw[i] = static_cast<float>(values[i]);
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));

  for (const auto& id : m.subject_ids()) {
    out.write(id.c_str(), static_cast<std::streamsize>(id.size() + 1));
  }
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

FeatureMatrix load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));

  std::string line;
  if (!std::getline(in, line)) throw DataError(fmt::format("'{}': empty file", path.string()));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "subject" || header[1] != "session") {
    throw DataError(fmt::format("'{}': malformed header, expected subject,session,f1..fk",
                                path.string()));
  }
  const std::size_t k = header.size() - 2;

  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows[2];  // per session, indexed like ids
  std::size_t line_no = 1;
  std::unordered_map<std::string, std::size_t> slot;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != k + 2) {
      throw DataError(fmt::format("'{}' row {}: {} fields, expected {}", path.string(), line_no,
                                  fields.size(), k + 2));
    }
    const std::string& id = fields[0];
    int session = 0;
    {
      auto [p, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), session);
      if (ec != std::errc() || p != fields[1].data() + fields[1].size()) {
        throw DataError(fmt::format("'{}' row {}: bad session '{}'", path.string(), line_no, fields[1]));
      }
    }
    if (session < 1 || session > 2) {
      throw DataError(fmt::format("'{}' row {}: session {} out of range, this toolkit requires s = 2",
                                  path.string(), line_no, session));
    }

    std::size_t s_idx;
    auto it = slot.find(id);
    if (it == slot.end()) {
      s_idx = ids.size();
      slot.emplace(id, s_idx);
      ids.push_back(id);
      rows[0].emplace_back();
      rows[1].emplace_back();
    } else {
      s_idx = it->second;
    }
    auto& row = rows[session - 1][s_idx];
    if (!row.empty()) {
      throw DataError(fmt::format("'{}' row {}: duplicate session {} for subject '{}'",
                                  path.string(), line_no, session, id));
    }
    row.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::string& cell = fields[j + 2];
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size() || cell.empty()) {
        throw DataError(fmt::format("'{}' row {} column f{}: unparsable value '{}'",
                                    path.string(), line_no, j + 1, cell));
      }
      if (!std::isfinite(v)) {
        throw DataError(fmt::format("'{}' row {} column f{}: non-finite value '{}'",
                                    path.string(), line_no, j + 1, cell));
      }
      row[j] = v;
    }
  }

  const std::size_t n = ids.size();
  if (n == 0) throw DataError(fmt::format("'{}': no data rows", path.string()));
  std::vector<double> values(n * k * 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (int m = 0; m < 2; ++m) {
      if (rows[m][i].empty()) {
        throw DataError(fmt::format("'{}': subject '{}' is missing session {}", path.string(),
                                    ids[i], m + 1));
      }
      for (std::size_t j = 0; j < k; ++j) values[(i * k + j) * 2 + m] = rows[m][i][j];
    }
  }
  return FeatureMatrix(n, k, std::move(values), std::move(ids));
}

void store_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "subject,session";
  for (std::size_t j = 0; j < m.features(); ++j) out << ",f" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < m.subjects(); ++i) {
    for (std::size_t s = 0; s < m.sessions(); ++s) {
      out << m.subject_ids()[i] << ',' << (s + 1);
      for (std::size_t j = 0; j < m.features(); ++j) {
        out << fmt::format(",{:.10g}", m.value(i, j, s));
      }
      out << '\n';
    }
  }
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace

FeatureMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  return format == MatrixFormat::Binary ? load_binary(path) : load_csv(path);
}

void store_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path,
                  MatrixFormat format) {
  if (format == MatrixFormat::Binary) {
    store_binary(matrix, path);
  } else {
    store_csv(matrix, path);
  }
}

FeatureMatrix zscore_features(const FeatureMatrix& matrix) {
  const std::size_t n = matrix.subjects(), k = matrix.features();
  const std::size_t len = n * FeatureMatrix::kSessions;
  std::vector<double> values = matrix.values();

  // Exceptions may not escape the parallel region; record the first offender.
  std::ptrdiff_t zero_variance_feature = -1;

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(k); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += values[(i * k + j) * 2] + values[(i * k + j) * 2 + 1];
    }
    const double mean = sum / static_cast<double>(len);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = values[(i * k + j) * 2] - mean;
      const double b = values[(i * k + j) * 2 + 1] - mean;
      ss += a * a + b * b;
    }
    const double sd = std::sqrt(ss / static_cast<double>(len - 1));
    if (!(sd > 0.0)) {
#pragma omp critical
      {
        if (zero_variance_feature < 0 || jj < zero_variance_feature) zero_variance_feature = jj;
      }
      continue;
    }
    const double inv = 1.0 / sd;
    for (std::size_t i = 0; i < n; ++i) {
      values[(i * k + j) * 2] = (values[(i * k + j) * 2] - mean) * inv;
      values[(i * k + j) * 2 + 1] = (values[(i * k + j) * 2 + 1] - mean) * inv;
    }
  }

  if (zero_variance_feature >= 0) {
    throw DataError(
        fmt::format("feature {} has zero variance, cannot z-score", zero_variance_feature));
  }
  return FeatureMatrix(n, k, std::move(values), matrix.subject_ids());
}

FeatureMatrix sample_subset(const FeatureMatrix& matrix, const SubsetRequest& req) {
  const std::size_t n = matrix.subjects(), k = matrix.features();
  if (req.n_subjects < 1 || req.n_subjects > n) {
    throw DataError(fmt::format("requested {} subjects from a matrix with {}", req.n_subjects, n));
  }
  if (req.n_features < 1 || req.n_features > k) {
    throw DataError(fmt::format("requested {} features from a matrix with {}", req.n_features, k));
  }

  auto draw_indices = [](std::size_t total, std::size_t want, Rng rng) {
    std::vector<std::size_t> pool(total);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < want; ++i) {
      const std::size_t r = i + rng.next_below(total - i);
      std::swap(pool[i], pool[r]);
    }
    pool.resize(want);
    return pool;
  };

  const auto subjects =
      draw_indices(n, req.n_subjects, Rng::stream(req.seed, {streams::kSubsetSubjects}));
  const auto features =
      draw_indices(k, req.n_features, Rng::stream(req.seed, {streams::kSubsetFeatures}));

  std::vector<double> values(req.n_subjects * req.n_features * 2);
  std::vector<std::string> ids;
  ids.reserve(req.n_subjects);
  for (std::size_t si = 0; si < subjects.size(); ++si) {
    const std::size_t src = subjects[si];
    ids.push_back(matrix.subject_ids()[src]);
    for (std::size_t fj = 0; fj < features.size(); ++fj) {
      const std::size_t f = features[fj];
      values[(si * req.n_features + fj) * 2] = matrix.value(src, f, 0);
      values[(si * req.n_features + fj) * 2 + 1] = matrix.value(src, f, 1);
    }
  }
  return FeatureMatrix(req.n_subjects, req.n_features, std::move(values), std::move(ids));
}

}  // namespace eerkit
