#include <gtest/gtest.h>

#include <random>
#include <unistd.h>

#include "infocomp/io.hpp"

using namespace infocomp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("infocomp_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

PosteriorSet random_set(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)), s(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      m(i, k) = z(rng);
      s(i, k) = std::exp(z(rng));
    }
  std::vector<SampleId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("img" + std::to_string(i * 3));
  return PosteriorSet(m, s, ids, "model_a");
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::input;
}

void write_bytes(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

}  // namespace

TEST(PosteriorIo, RoundTripIsBitExact) {
  TempDir t;
  const auto s = random_set(37, 4);
  io::write_posterior_set(s, t.path / "set");
  const auto r = io::read_posterior_set(t.path / "set");
  EXPECT_TRUE(r.means() == s.means());
  EXPECT_TRUE(r.stddevs() == s.stddevs());
  EXPECT_EQ(r.sample_ids(), s.sample_ids());
  EXPECT_EQ(r.space_id(), "model_a");
  EXPECT_EQ(fs::file_size(t.path / "set" / "means.bin"), 37u * 4 * 8);
}

TEST(PosteriorIo, TruncatedPayload) {
  TempDir t;
  io::write_posterior_set(random_set(5, 2), t.path / "set");
  fs::resize_file(t.path / "set" / "stddevs.bin", 40);
  EXPECT_EQ(code_of([&] { io::read_posterior_set(t.path / "set"); }), Errc::size_mismatch);
}

TEST(PosteriorIo, ZeroStddevNamesIndex) {
  TempDir t;
  auto s = random_set(5, 2);
  io::write_posterior_set(s, t.path / "set");
  std::vector<double> sd(s.stddevs().data(), s.stddevs().data() + 10);
  sd[7] = 0.0;  // sample 3, dim 1
  write_bytes(t.path / "set" / "stddevs.bin", std::string(reinterpret_cast<const char*>(sd.data()), 80));
  try {
    io::read_posterior_set(t.path / "set");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::nonpositive_stddev);
    EXPECT_NE(std::string(e.what()).find("sample 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("dim 1"), std::string::npos);
  }
  sd[7] = std::nan("");
  write_bytes(t.path / "set" / "stddevs.bin", std::string(reinterpret_cast<const char*>(sd.data()), 80));
  EXPECT_EQ(code_of([&] { io::read_posterior_set(t.path / "set"); }), Errc::non_finite);
}

TEST(PosteriorIo, VersionMismatch) {
  TempDir t;
  io::write_posterior_set(random_set(5, 2), t.path / "set");
  auto j = nlohmann::json::parse(std::ifstream(t.path / "set" / "manifest.json"));
  j["format_version"] = "2";
  std::ofstream(t.path / "set" / "manifest.json") << j.dump();
  EXPECT_EQ(code_of([&] { io::read_posterior_set(t.path / "set"); }), Errc::version_mismatch);
}

TEST(PosteriorIo, MissingDirectory) {
  EXPECT_EQ(code_of([&] { io::read_posterior_set("/nonexistent/infocomp"); }), Errc::io);
}

TEST(FingerprintIo, RoundTripF32AndF64) {
  TempDir t;
  const auto f = fingerprint_gaussian(random_set(30, 2));
  io::write_fingerprint(f, t.path / "f32");
  io::write_fingerprint(f, t.path / "f64", io::Dtype::f64le);
  const auto a = io::read_fingerprint(t.path / "f32");
  const auto b = io::read_fingerprint(t.path / "f64");
  EXPECT_LT((a.values() - f.values()).cwiseAbs().maxCoeff(), 6e-8);
  EXPECT_TRUE(b.values() == f.values());
  EXPECT_EQ(a.sample_ids(), f.sample_ids());
}

TEST(FingerprintIo, PayloadSize) {
  TempDir t;
  io::write_fingerprint(Fingerprint::identity(1000), t.path / "fp");
  EXPECT_EQ(fs::file_size(t.path / "fp" / "bc.bin"), 4000000u);
}

TEST(FingerprintIo, AsymmetryNeedsRepairFlag) {
  TempDir t;
  io::write_fingerprint(Fingerprint(Matrix::Identity(3, 3)), t.path / "fp");
  std::vector<float> v{1, 0.5f, 0, 0.3f, 1, 0, 0, 0, 1};
  write_bytes(t.path / "fp" / "bc.bin", std::string(reinterpret_cast<const char*>(v.data()), 36));
  EXPECT_EQ(code_of([&] { io::read_fingerprint(t.path / "fp"); }), Errc::asymmetric);
  const auto r = io::read_fingerprint(t.path / "fp", {true});
  EXPECT_NEAR(r(0, 1), 0.4, 1e-7);
  EXPECT_EQ(r(0, 1), r(1, 0));
  v[8] = 0.9f;
  write_bytes(t.path / "fp" / "bc.bin", std::string(reinterpret_cast<const char*>(v.data()), 36));
  EXPECT_EQ(code_of([&] { io::read_fingerprint(t.path / "fp", {true}); }), Errc::diagonal);
}

TEST(Csv, HardLabels) {
  TempDir t;
  const auto p = t.path / "l.csv";
  write_bytes(p, "sample_id,label\na,z\nb,y\nc,z\n");
  const auto h = io::read_hard_labels(p);
  EXPECT_EQ(h.labels(), (std::vector<int>{0, 1, 0}));
  write_bytes(p, "sample_id,label\nw,a\nx,a\ny,b\nz,b\n");
  EXPECT_EQ(io::read_hard_labels(p).labels(), (std::vector<int>{0, 0, 1, 1}));
  const std::vector<SampleId> ref{"z", "y", "x", "w"};
  const auto re = io::read_hard_labels(p, &ref);
  EXPECT_EQ(re.sample_ids(), ref);
  EXPECT_EQ(re.labels(), (std::vector<int>{0, 0, 1, 1}));
  const std::vector<SampleId> bigger{"w", "x", "y", "z", "q"};
  EXPECT_EQ(code_of([&] { io::read_hard_labels(p, &bigger); }), Errc::missing_id);
  write_bytes(p, "sample_id,label\na,1\na,2\n");
  EXPECT_EQ(code_of([&] { io::read_hard_labels(p); }), Errc::duplicate_id);
  write_bytes(p, "id,label\na,1\n");
  EXPECT_EQ(code_of([&] { io::read_hard_labels(p); }), Errc::malformed);
}

TEST(Csv, SoftMemberships) {
  TempDir t;
  const auto p = t.path / "s.csv";
  write_bytes(p, "sample_id,c0,c1\na,0.25,0.75\nb,1,0\n");
  const auto s = io::read_soft_memberships(p);
  EXPECT_EQ(s.memberships()(0, 1), 0.75);
  EXPECT_FALSE(io::is_hard_label_csv(p));
}

TEST(Export, MatrixCsv) {
  TempDir t;
  Matrix m(2, 2);
  m << 1, std::nan(""), std::nan(""), 1;
  io::export_matrix_csv(m, {"a:0", "b:1"}, t.path / "m.csv");
  std::ifstream in(t.path / "m.csv");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], ",a:0,b:1");
  EXPECT_EQ(lines[1], "a:0,1,undefined");
  std::vector<std::string> labels;
  const auto back = io::import_matrix_csv(t.path / "m.csv", &labels);
  EXPECT_EQ(back(0, 0), 1.0);
  EXPECT_TRUE(std::isnan(back(0, 1)));
  EXPECT_EQ(labels[1], "b:1");
}

TEST(Export, JsonSentinelsRoundTrip) {
  TempDir t;
  nlohmann::json j;
  j["nmi"] = io::number_json(std::nan(""));
  j["reach"] = io::number_json(std::numeric_limits<double>::infinity());
  j["value"] = io::number_json(0.1234567890123);
  io::export_json(j, t.path / "r.json");
  const auto back = io::import_json(t.path / "r.json");
  EXPECT_EQ(back["nmi"], "undefined");
  EXPECT_EQ(back["reach"], "inf");
  EXPECT_TRUE(std::isnan(io::number_from_json(back["nmi"])));
  EXPECT_TRUE(std::isinf(io::number_from_json(back["reach"])));
  EXPECT_EQ(io::number_from_json(back["value"]), 0.1234567890123);
}
