#include <gtest/gtest.h>

#include <random>

#include "infocomp/core.hpp"

using namespace infocomp;

namespace {

// Trapezoid rule for the integral of sqrt(p q) of two 1-D Gaussians.
double bc_quadrature(double m1, double s1, double m2, double s2) {
  const double lo = std::min(m1 - 12 * s1, m2 - 12 * s2);
  const double hi = std::max(m1 + 12 * s1, m2 + 12 * s2);
  const int steps = 200000;
  const double h = (hi - lo) / steps;
  auto pdf = [](double x, double m, double s) {
    return std::exp(-0.5 * (x - m) * (x - m) / (s * s)) / (s * std::sqrt(2 * M_PI));
  };
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    acc += w * std::sqrt(pdf(x, m1, s1) * pdf(x, m2, s2));
  }
  return acc * h;
}

PosteriorSet random_set(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.2, 1.5);
  RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)), s(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      m(i, k) = 2.0 * z(rng);
      s(i, k) = u(rng);
    }
  return PosteriorSet(m, s);
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

}  // namespace

TEST(Bhattacharyya, MatchesQuadrature1D) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mean(-3, 3), sd(0.2, 2.0);
  for (int t = 0; t < 20; ++t) {
    const double m1 = mean(rng), m2 = mean(rng), s1 = sd(rng), s2 = sd(rng);
    const GaussianPosterior p(Vector::Constant(1, m1), Vector::Constant(1, s1));
    const GaussianPosterior q(Vector::Constant(1, m2), Vector::Constant(1, s2));
    EXPECT_NEAR(bc_gaussian(p, q), bc_quadrature(m1, s1, m2, s2), 1e-8);
  }
}

TEST(Bhattacharyya, FactorizesOverDimensions) {
  Vector m1(2), s1(2), m2(2), s2(2);
  m1 << 0.3, -1.0;
  s1 << 0.5, 1.2;
  m2 << 1.1, 0.4;
  s2 << 0.9, 0.7;
  const double expect = bc_quadrature(0.3, 0.5, 1.1, 0.9) * bc_quadrature(-1.0, 1.2, 0.4, 0.7);
  EXPECT_NEAR(bc_gaussian({m1, s1}, {m2, s2}), expect, 1e-8);
}

TEST(Bhattacharyya, IdenticalIsOneAndSymmetric) {
  Vector m(3), s(3);
  m << 1, 2, 3;
  s << 0.1, 1, 10;
  EXPECT_EQ(bc_gaussian({m, s}, {m, s}), 1.0);
  Vector m2 = m.array() + 0.5;
  EXPECT_EQ(bc_gaussian({m, s}, {m2, s}), bc_gaussian({m2, s}, {m, s}));
}

TEST(Bhattacharyya, FarApartUnderflowsToZero) {
  const GaussianPosterior p(Vector::Constant(1, 0.0), Vector::Constant(1, 0.01));
  const GaussianPosterior q(Vector::Constant(1, 100.0), Vector::Constant(1, 0.01));
  EXPECT_EQ(bc_gaussian(p, q), 0.0);
}

TEST(Fingerprint, GaussianEntriesInRange) {
  const auto f = fingerprint_gaussian(random_set(50, 3, 1));
  EXPECT_EQ(f.size(), 50u);
  EXPECT_TRUE((f.values().array() >= 0.0).all());
  EXPECT_TRUE((f.values().array() <= 1.0).all());
  EXPECT_TRUE(f.values().diagonal().isOnes(0.0));
  EXPECT_TRUE(f.values().isApprox(f.values().transpose(), 0.0));
}

TEST(Fingerprint, RowMatchesMatrix) {
  const auto s = random_set(30, 4, 2);
  const auto f = fingerprint_gaussian(s);
  std::vector<double> row(30);
  fingerprint_row(s, 7, row);
  for (std::size_t j = 0; j < 30; ++j) EXPECT_DOUBLE_EQ(row[j], f(7, j));
}

TEST(Fingerprint, ProductOfChannelsIsFullSpace) {
  const auto s = random_set(200, 10, 5);
  const auto full = fingerprint_gaussian(s);
  Matrix prod = Matrix::Ones(200, 200);
  for (std::size_t k = 0; k < s.dim(); ++k) prod.array() *= fingerprint_gaussian(marginal_channel(s, k)).values().array();
  EXPECT_LT((full.values() - prod).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fingerprint, ThreadCountDoesNotChangeResult) {
  const auto s = random_set(120, 3, 9);
  set_thread_count(1);
  const auto a = fingerprint_gaussian(s);
  set_thread_count(3);
  const auto b = fingerprint_gaussian(s);
  set_thread_count(1);
  EXPECT_TRUE(a.values() == b.values());
}

TEST(Fingerprint, HardIsLabelEquality) {
  const HardClustering h({0, 0, 1, 2, 1});
  const auto f = fingerprint_hard(h);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(f(i, j), h.labels()[i] == h.labels()[j] ? 1.0 : 0.0);
}

TEST(Fingerprint, DiscreteSoftOverlap) {
  RowMatrix m(3, 2);
  m << 1.0, 0.0, 0.5, 0.5, 0.0, 1.0;
  const auto f = fingerprint_discrete_soft(DiscreteSoftClustering(m));
  EXPECT_NEAR(f(0, 1), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(f(1, 2), std::sqrt(0.5), 1e-15);
  EXPECT_EQ(f(0, 2), 0.0);
  EXPECT_TRUE(fingerprint_discrete_soft(DiscreteSoftClustering::one_hot(HardClustering({0, 1, 1}))).values() ==
              fingerprint_hard(HardClustering({0, 1, 1})).values());
}

TEST(Fingerprint, ProductKeepsIdsAndRejectsMisalignment) {
  const auto a = Fingerprint::identity(3);
  const auto b = Fingerprint(Matrix::Ones(3, 3), {"a", "b", "c"});
  EXPECT_EQ(code_of([&] { fingerprint_product(a, b); }), Errc::alignment);
  EXPECT_TRUE(fingerprint_product(a, a).values() == a.values());
}

TEST(Validation, PosteriorSetErrors) {
  RowMatrix m = RowMatrix::Zero(3, 1), s = RowMatrix::Ones(3, 1);
  s(1, 0) = 0.0;
  EXPECT_EQ(code_of([&] { PosteriorSet(m, s); }), Errc::nonpositive_stddev);
  s(1, 0) = 1.0;
  m(2, 0) = std::nan("");
  EXPECT_EQ(code_of([&] { PosteriorSet(m, s); }), Errc::non_finite);
  m(2, 0) = 0.0;
  EXPECT_EQ(code_of([&] { PosteriorSet(m, s, {"a", "b", "a"}); }), Errc::duplicate_id);
  EXPECT_EQ(code_of([&] { PosteriorSet(RowMatrix::Zero(1, 1), RowMatrix::Ones(1, 1)); }), Errc::input);
  EXPECT_NO_THROW(PosteriorSet(m, s));
}

TEST(Validation, FingerprintErrors) {
  Matrix v = Matrix::Identity(3, 3);
  v(0, 1) = 0.5;
  EXPECT_EQ(code_of([&] { Fingerprint{v}; }), Errc::asymmetric);
  v(1, 0) = 0.5;
  v(2, 2) = 0.99;
  EXPECT_EQ(code_of([&] { Fingerprint{v}; }), Errc::diagonal);
  v(2, 2) = 1.0;
  v(0, 2) = v(2, 0) = 1.5;
  EXPECT_EQ(code_of([&] { Fingerprint{v}; }), Errc::input);
}

TEST(Validation, SoftRowsMustSumToOne) {
  RowMatrix m(2, 2);
  m << 0.5, 0.4, 0.5, 0.5;
  EXPECT_EQ(code_of([&] { DiscreteSoftClustering{m}; }), Errc::input);
}

TEST(Spaces, ConcatIsJoint) {
  const auto a = random_set(20, 2, 11), b = random_set(20, 1, 12);
  const std::vector<PosteriorSet> both{a, b};
  const auto j = concat_spaces(both);
  EXPECT_EQ(j.dim(), 3u);
  const Matrix expect = fingerprint_gaussian(a).values().cwiseProduct(fingerprint_gaussian(b).values());
  EXPECT_LT((fingerprint_gaussian(j).values() - expect).cwiseAbs().maxCoeff(), 1e-12);
}
