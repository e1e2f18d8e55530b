#pragma once

// On-disk formats. A posterior set or fingerprint is a directory holding
// manifest.json plus raw little-endian arrays; see FORMATS.md.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "infocomp/core.hpp"

namespace infocomp::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* kFormatVersion = "1";
inline constexpr const char* kManifestName = "manifest.json";

enum class Dtype { f32le, f64le };

inline std::string dtype_name(Dtype d) { return d == Dtype::f32le ? "f32le" : "f64le"; }

inline Dtype parse_dtype(const std::string& s) {
  if (s == "f32le") return Dtype::f32le;
  if (s == "f64le") return Dtype::f64le;
  fail(Errc::malformed, "unknown dtype '" + s + "'");
}

inline std::size_t dtype_size(Dtype d) { return d == Dtype::f32le ? 4 : 8; }

// ------------------------------------------------------------ raw arrays

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

inline void write_array(const fs::path& path, const double* data, std::size_t count, Dtype dtype) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  if (dtype == Dtype::f64le) {
    std::vector<double> buf(data, data + count);
    for (auto& v : buf) v = to_little(v);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(count * 8));
  } else {
    std::vector<float> buf(count);
    for (std::size_t i = 0; i < count; ++i) buf[i] = to_little(static_cast<float>(data[i]));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(count * 4));
  }
  if (!out) fail(Errc::io, "write failed: " + path.string());
}

inline std::vector<double> read_array(const fs::path& path, std::size_t count, Dtype dtype) {
  std::error_code ec;
  const auto bytes = fs::file_size(path, ec);
  if (ec) fail(Errc::io, "cannot read " + path.string());
  const std::size_t expect = count * dtype_size(dtype);
  if (bytes != expect) {
    fail(Errc::size_mismatch, path.string() + ": expected " + std::to_string(expect) + " bytes, found " +
                                  std::to_string(bytes));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot read " + path.string());
  std::vector<double> out(count);
  if (dtype == Dtype::f64le) {
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(expect));
    for (auto& v : out) v = to_little(v);
  } else {
    std::vector<float> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expect));
    for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<double>(to_little(buf[i]));
  }
  if (!in) fail(Errc::io, "short read: " + path.string());
  return out;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(Errc::io, "write failed: " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::io, "cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace detail

// -------------------------------------------------------------- manifest

struct Manifest {
  std::string kind;  // "posterior_set" or "fingerprint"
  std::size_t n = 0;
  std::size_t d = 0;  // posterior sets only
  std::vector<SampleId> sample_ids;
  std::string space_id;
  Dtype dtype = Dtype::f64le;
  std::map<std::string, std::string> payload;
  json metadata = json::object();

  json to_json() const {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = kind;
    j["n"] = n;
    if (kind == "posterior_set") j["d"] = d;
    j["sample_ids"] = sample_ids;
    j["space_id"] = space_id;
    j["dtype"] = dtype_name(dtype);
    j["payload"] = payload;
    j["metadata"] = metadata;
    return j;
  }

  static Manifest from_json(const json& j) {
    if (!j.is_object()) fail(Errc::malformed, "manifest is not a JSON object");
    if (!j.contains("format_version")) fail(Errc::malformed, "manifest lacks format_version");
    const auto& v = j.at("format_version");
    if (!v.is_string() || v.get<std::string>() != kFormatVersion) {
      fail(Errc::version_mismatch, "unsupported format_version " + v.dump() + " (expected \"1\")");
    }
    try {
      Manifest m;
      m.kind = j.at("kind").get<std::string>();
      m.n = j.at("n").get<std::size_t>();
      if (j.contains("d")) m.d = j.at("d").get<std::size_t>();
      m.sample_ids = j.at("sample_ids").get<std::vector<std::string>>();
      m.space_id = j.value("space_id", std::string{});
      m.dtype = parse_dtype(j.at("dtype").get<std::string>());
      m.payload = j.at("payload").get<std::map<std::string, std::string>>();
      if (j.contains("metadata")) m.metadata = j.at("metadata");
      if (m.sample_ids.size() != m.n) {
        fail(Errc::size_mismatch, "manifest lists " + std::to_string(m.sample_ids.size()) + " sample ids for n = " +
                                      std::to_string(m.n));
      }
      return m;
    } catch (const json::exception& e) {
      fail(Errc::malformed, std::string("malformed manifest: ") + e.what());
    }
  }
};

inline Manifest read_manifest(const fs::path& dir) {
  const auto path = dir / kManifestName;
  if (!fs::exists(path)) fail(Errc::io, "no " + std::string(kManifestName) + " in " + dir.string());
  json j;
  try {
    j = json::parse(detail::read_text(path));
  } catch (const json::parse_error& e) {
    fail(Errc::malformed, path.string() + ": " + e.what());
  }
  return Manifest::from_json(j);
}

inline void write_manifest(const fs::path& dir, const Manifest& m) {
  detail::write_text(dir / kManifestName, m.to_json().dump(2) + "\n");
}

inline std::string payload_name(const Manifest& m, const std::string& key) {
  auto it = m.payload.find(key);
  if (it == m.payload.end()) fail(Errc::malformed, "manifest payload lacks '" + key + "'");
  return it->second;
}

// -------------------------------------------------------- posterior sets

inline void write_posterior_set(const PosteriorSet& s, const fs::path& dir, json metadata = json::object()) {
  detail::ensure_dir(dir);
  Manifest m{"posterior_set", s.size(), s.dim(), s.sample_ids(), s.space_id(), Dtype::f64le,
             {{"means", "means.bin"}, {"stddevs", "stddevs.bin"}}, std::move(metadata)};
  const auto count = s.size() * s.dim();
  detail::write_array(dir / "means.bin", s.means().data(), count, Dtype::f64le);
  detail::write_array(dir / "stddevs.bin", s.stddevs().data(), count, Dtype::f64le);
  write_manifest(dir, m);
}

inline PosteriorSet read_posterior_set(const fs::path& dir) {
  const Manifest m = read_manifest(dir);
  if (m.kind != "posterior_set") fail(Errc::malformed, dir.string() + " holds a " + m.kind + ", not a posterior_set");
  const auto count = m.n * m.d;
  const auto means = detail::read_array(dir / payload_name(m, "means"), count, m.dtype);
  const auto sds = detail::read_array(dir / payload_name(m, "stddevs"), count, m.dtype);
  auto where = [&](std::size_t k) {
    return "sample " + std::to_string(k / m.d) + " ('" + m.sample_ids[k / m.d] + "'), dim " + std::to_string(k % m.d);
  };
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::isfinite(means[k])) fail(Errc::non_finite, "non-finite mean at " + where(k));
    if (!std::isfinite(sds[k])) fail(Errc::non_finite, "non-finite stddev at " + where(k));
    if (!(sds[k] > 0.0)) fail(Errc::nonpositive_stddev, "nonpositive stddev at " + where(k));
  }
  const auto rows = static_cast<Eigen::Index>(m.n), cols = static_cast<Eigen::Index>(m.d);
  RowMatrix mu = Eigen::Map<const RowMatrix>(means.data(), rows, cols);
  RowMatrix sd = Eigen::Map<const RowMatrix>(sds.data(), rows, cols);
  return PosteriorSet(std::move(mu), std::move(sd), m.sample_ids, m.space_id);
}

// ----------------------------------------------------------- fingerprints

inline void write_fingerprint(const Fingerprint& f, const fs::path& dir, Dtype dtype = Dtype::f32le,
                              json metadata = json::object()) {
  detail::ensure_dir(dir);
  Manifest m{"fingerprint", f.size(), 0, f.sample_ids(), f.space_id(), dtype, {{"bc", "bc.bin"}}, std::move(metadata)};
  // symmetric, so column-major storage is also row-major
  detail::write_array(dir / "bc.bin", f.values().data(), f.size() * f.size(), dtype);
  write_manifest(dir, m);
}

struct FingerprintReadOptions {
  bool repair = false;  // average asymmetric entries instead of failing
};

inline double read_tolerance(Dtype d) { return d == Dtype::f32le ? 1e-6 : 1e-12; }

inline Fingerprint read_fingerprint(const fs::path& dir, FingerprintReadOptions opt = {}) {
  const Manifest m = read_manifest(dir);
  if (m.kind != "fingerprint") fail(Errc::malformed, dir.string() + " holds a " + m.kind + ", not a fingerprint");
  const auto raw = detail::read_array(dir / payload_name(m, "bc"), m.n * m.n, m.dtype);
  const double tol = read_tolerance(m.dtype);
  const auto n = static_cast<Eigen::Index>(m.n);
  Matrix v = Eigen::Map<const RowMatrix>(raw.data(), n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = v(i, j);
      if (!std::isfinite(x)) {
        fail(Errc::non_finite, "non-finite entry at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      if (x < -tol || x > 1.0 + tol) {
        fail(Errc::input, "entry outside [0, 1] at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
    if (std::abs(v(i, i) - 1.0) > tol) fail(Errc::diagonal, "diagonal entry " + std::to_string(i) + " is not 1");
    v(i, i) = 1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double a = v(i, j), b = v(j, i);
      if (std::abs(a - b) > tol && !opt.repair) {
        fail(Errc::asymmetric, "asymmetric entries at (" + std::to_string(i) + ", " + std::to_string(j) +
                                   "); pass the repair flag to average them");
      }
      const double avg = std::clamp(0.5 * (a + b), 0.0, 1.0);
      v(i, j) = avg;
      v(j, i) = avg;
    }
  }
  return Fingerprint(std::move(v), m.sample_ids, m.space_id);
}

/// Kind recorded in a directory's manifest.
inline std::string kind_of(const fs::path& dir) { return read_manifest(dir).kind; }

/// Subdirectories holding a manifest, sorted by name.
inline std::vector<fs::path> list_artifacts(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(Errc::io, dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / kManifestName)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// -------------------------------------------------------------------- CSV

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

// Orders rows by the reference ids (when given), checking duplicates and coverage.
inline std::vector<std::size_t> align_rows(const std::vector<SampleId>& ids, const std::vector<SampleId>* reference) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!pos.emplace(ids[i], i).second) fail(Errc::duplicate_id, "duplicate sample_id '" + ids[i] + "'");
  }
  std::vector<std::size_t> order;
  if (!reference) {
    for (std::size_t i = 0; i < ids.size(); ++i) order.push_back(i);
    return order;
  }
  for (const auto& r : *reference) {
    auto it = pos.find(r);
    if (it == pos.end()) fail(Errc::missing_id, "sample_id '" + r + "' missing from file");
    order.push_back(it->second);
  }
  if (ids.size() != reference->size()) {
    std::unordered_map<std::string, int> ref;
    for (const auto& r : *reference) ref[r] = 1;
    for (const auto& id : ids)
      if (!ref.count(id)) fail(Errc::missing_id, "sample_id '" + id + "' is not in the reference set");
  }
  return order;
}

}  // namespace detail

/// CSV with header `sample_id,label`. Labels are densified to [0, K) in order
/// of first appearance. With a reference, rows are reordered to match it.
inline HardClustering read_hard_labels(const fs::path& path, const std::vector<SampleId>* reference = nullptr) {
  const auto rows = detail::read_csv(path);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "sample_id" || rows[0][1] != "label") {
    fail(Errc::malformed, path.string() + ": expected header 'sample_id,label'");
  }
  std::vector<SampleId> ids;
  std::vector<std::string> raw;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) fail(Errc::malformed, path.string() + ": line " + std::to_string(r + 1) + " needs 2 cells");
    ids.push_back(rows[r][0]);
    raw.push_back(rows[r][1]);
  }
  const auto order = detail::align_rows(ids, reference);
  std::unordered_map<std::string, int> dense;
  std::vector<int> labels;
  std::vector<SampleId> out_ids;
  for (auto i : order) {
    auto [it, inserted] = dense.emplace(raw[i], static_cast<int>(dense.size()));
    labels.push_back(it->second);
    out_ids.push_back(ids[i]);
  }
  return HardClustering(std::move(labels), static_cast<int>(dense.size()), std::move(out_ids));
}

/// CSV with header `sample_id,<name>,...`: one hard labelling per column,
/// each densified like read_hard_labels.
inline std::vector<std::pair<std::string, HardClustering>> read_label_table(
    const fs::path& path, const std::vector<SampleId>* reference = nullptr) {
  const auto rows = detail::read_csv(path);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "sample_id") {
    fail(Errc::malformed, path.string() + ": expected header 'sample_id,<name>,...'");
  }
  const std::size_t k = rows[0].size() - 1;
  std::vector<SampleId> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != k + 1) fail(Errc::malformed, path.string() + ": line " + std::to_string(r + 1) + " is ragged");
    ids.push_back(rows[r][0]);
  }
  const auto order = detail::align_rows(ids, reference);
  std::vector<std::pair<std::string, HardClustering>> out;
  for (std::size_t c = 1; c <= k; ++c) {
    std::unordered_map<std::string, int> dense;
    std::vector<int> labels;
    std::vector<SampleId> out_ids;
    for (auto i : order) {
      auto [it, inserted] = dense.emplace(rows[i + 1][c], static_cast<int>(dense.size()));
      labels.push_back(it->second);
      out_ids.push_back(ids[i]);
    }
    out.emplace_back(rows[0][c], HardClustering(std::move(labels), static_cast<int>(dense.size()), std::move(out_ids)));
  }
  return out;
}

/// CSV with header `sample_id,<cluster>,...`; each row a membership distribution.
inline DiscreteSoftClustering read_soft_memberships(const fs::path& path,
                                                    const std::vector<SampleId>* reference = nullptr) {
  const auto rows = detail::read_csv(path);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "sample_id") {
    fail(Errc::malformed, path.string() + ": expected header 'sample_id,<cluster>,...'");
  }
  const std::size_t k = rows[0].size() - 1;
  std::vector<SampleId> ids;
  std::vector<std::vector<double>> vals;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != k + 1) {
      fail(Errc::malformed, path.string() + ": line " + std::to_string(r + 1) + " needs " + std::to_string(k + 1) +
                                " cells");
    }
    ids.push_back(rows[r][0]);
    std::vector<double> row;
    for (std::size_t c = 1; c <= k; ++c) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(rows[r][c], &used));
        if (used != rows[r][c].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        fail(Errc::malformed, path.string() + ": bad number '" + rows[r][c] + "' on line " + std::to_string(r + 1));
      }
    }
    vals.push_back(std::move(row));
  }
  const auto order = detail::align_rows(ids, reference);
  RowMatrix m(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(k));
  std::vector<SampleId> out_ids;
  for (std::size_t r = 0; r < order.size(); ++r) {
    for (std::size_t c = 0; c < k; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = vals[order[r]][c];
    out_ids.push_back(ids[order[r]]);
  }
  return DiscreteSoftClustering(std::move(m), std::move(out_ids));
}

/// True when the file's header names a hard labelling.
inline bool is_hard_label_csv(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) fail(Errc::io, "cannot read " + path.string());
  const auto h = detail::split_csv_line(line);
  return h.size() == 2 && h[0] == "sample_id" && h[1] == "label";
}

// ---------------------------------------------------------------- exports

/// Number formatting shared by CSV and JSON exports: NaN is "undefined",
/// infinities are "inf" / "-inf".
inline std::string format_number(double v) {
  if (std::isnan(v)) return "undefined";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json number_json(double v) {
  if (std::isnan(v)) return "undefined";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "undefined") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(Errc::malformed, "not a number or sentinel: " + j.dump());
}

/// Square matrix with a header row and a label column.
inline void export_matrix_csv(const Matrix& m, const std::vector<std::string>& labels, const fs::path& path) {
  require(m.rows() == m.cols() && static_cast<std::size_t>(m.rows()) == labels.size(), Errc::input,
          "matrix export needs one label per row");
  std::ostringstream out;
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_number(m(i, j));
    out << '\n';
  }
  detail::write_text(path, out.str());
}

/// Reads back a matrix written by export_matrix_csv.
inline Matrix import_matrix_csv(const fs::path& path, std::vector<std::string>* labels = nullptr) {
  const auto rows = detail::read_csv(path);
  if (rows.empty()) fail(Errc::malformed, path.string() + " is empty");
  const std::size_t n = rows[0].size() - 1;
  if (rows.size() != n + 1) fail(Errc::size_mismatch, path.string() + ": matrix is not square");
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (labels) labels->assign(rows[0].begin() + 1, rows[0].end());
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i + 1].size() != n + 1) fail(Errc::malformed, path.string() + ": ragged row");
    for (std::size_t j = 0; j < n; ++j) {
      const auto& c = rows[i + 1][j + 1];
      double v;
      if (c == "undefined") v = std::numeric_limits<double>::quiet_NaN();
      else if (c == "inf") v = std::numeric_limits<double>::infinity();
      else if (c == "-inf") v = -std::numeric_limits<double>::infinity();
      else v = std::stod(c);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return m;
}

/// Two-column (or wider) table with a header.
inline void export_table_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                             const fs::path& path) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
  detail::write_text(path, out.str());
}

inline void export_json(const json& report, const fs::path& path) { detail::write_text(path, report.dump(2) + "\n"); }

inline json import_json(const fs::path& path) {
  try {
    return json::parse(detail::read_text(path));
  } catch (const json::parse_error& e) {
    fail(Errc::malformed, path.string() + ": " + e.what());
  }
}

}  // namespace infocomp::io
