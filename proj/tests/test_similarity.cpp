#include <gtest/gtest.h>

#include <map>
#include <random>

#include "infocomp/similarity.hpp"

using namespace infocomp;

namespace {

HardClustering random_labels(std::size_t n, int k, std::mt19937_64& rng) {
  std::vector<int> lab(n);
  for (auto& l : lab) l = static_cast<int>(rng() % static_cast<unsigned>(k));
  return HardClustering(lab, k);
}

PosteriorSet random_set(std::size_t n, std::size_t d, std::mt19937_64& rng) {
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

// Classic contingency-table measures computed from scratch.
struct Classic {
  double nmi, vi;
  bool defined;
};

Classic classic(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    cab[{a[i], b[i]}] += 1;
  }
  double ha = 0, hb = 0, mi = 0;
  for (auto& [k, c] : ca) ha -= c / n * std::log2(c / n);
  for (auto& [k, c] : cb) hb -= c / n * std::log2(c / n);
  for (auto& [k, c] : cab) mi += c / n * std::log2(c * n / (ca[k.first] * cb[k.second]));
  const bool def = ha > 1e-12 && hb > 1e-12;
  return {def ? mi / std::sqrt(ha * hb) : 0.0, ha + hb - 2 * mi, def};
}

RowMatrix appendix_v() {
  RowMatrix v = RowMatrix::Zero(4, 4);
  const int u[] = {0, 0, 1, 1}, w[] = {0, 1, 0, 1};
  for (int x = 0; x < 4; ++x) {
    v(x, u[x]) = 0.5;
    v(x, 2 + w[x]) = 0.5;
  }
  return v;
}

}  // namespace

TEST(Generalized, ReducesToContingencyOnHardClusterings) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 63;
    const auto a = random_labels(n, 1 + static_cast<int>(rng() % 8), rng);
    const auto b = random_labels(n, 1 + static_cast<int>(rng() % 8), rng);
    const auto c = classic(a.labels(), b.labels());
    const auto fa = fingerprint_hard(a), fb = fingerprint_hard(b);
    const auto g = nmi(fa, fb);
    ASSERT_EQ(g.defined, c.defined);
    if (c.defined) EXPECT_NEAR(g.value, c.nmi, 1e-10);
    EXPECT_NEAR(vi(fa, fb).value, c.vi, 1e-10);
    if (c.defined) EXPECT_NEAR(nmi_hard(a, b).value, c.nmi, 1e-10);
    EXPECT_NEAR(vi_hard(a, b).value, c.vi, 1e-10);
  }
}

TEST(Generalized, SelfIdentityIsExact) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto f = fingerprint_gaussian(random_set(40, 2, rng));
    EXPECT_EQ(nmi(f, f).value, 1.0);
    EXPECT_EQ(vi(f, f).value, 0.0);
  }
}

TEST(Generalized, Symmetric) {
  std::mt19937_64 rng(13);
  const auto a = fingerprint_gaussian(random_set(50, 2, rng));
  const auto b = fingerprint_gaussian(random_set(50, 3, rng));
  EXPECT_EQ(nmi(a, b).value, nmi(b, a).value);
  EXPECT_EQ(vi(a, b).value, vi(b, a).value);
}

TEST(Generalized, UndefinedForUninformativeSpace) {
  const auto r = nmi(Fingerprint::ones(8), Fingerprint::identity(8));
  EXPECT_FALSE(r.defined);
  EXPECT_TRUE(std::isnan(r.value));
  EXPECT_FALSE(r.note.empty());
  EXPECT_TRUE(std::isnan(to_distance(r)));
}

TEST(Generalized, MutualInformationOfIndependentSplits) {
  const auto u = fingerprint_hard(HardClustering({0, 0, 1, 1}));
  const auto w = fingerprint_hard(HardClustering({0, 1, 0, 1}));
  EXPECT_NEAR(mutual_info(u, w).value, 0.0, 1e-12);
  EXPECT_NEAR(mutual_info(u, u).value, 1.0, 1e-12);
}

TEST(Exact, AppendixCounterexample) {
  const auto u = DiscreteSoftClustering::one_hot(HardClustering({0, 0, 1, 1}));
  const auto w = DiscreteSoftClustering::one_hot(HardClustering({0, 1, 0, 1}));
  const DiscreteSoftClustering v(appendix_v());
  EXPECT_NEAR(vi_exact(u, w).value, 2.0, 1e-9);
  EXPECT_NEAR(vi_exact(u, v).value, 0.5, 1e-9);
  EXPECT_NEAR(vi_exact(v, w).value, 0.5, 1e-9);
  EXPECT_LT(vi_exact(u, v).value + vi_exact(v, w).value, vi_exact(u, w).value);
  // I(V;V') = 2 I(X;V) - I(X;V,V') = 0.5 bits
  const auto t = exact_terms(v, v);
  EXPECT_NEAR(t.self_u(), 0.5, 1e-12);
}

TEST(MonteCarlo, SelfComparisonWithinError) {
  std::mt19937_64 rng(14);
  const auto s = random_set(60, 1, rng);
  const auto n = nmi_mc(s, s, {3000, 1.0, 5});
  ASSERT_TRUE(n.defined);
  EXPECT_GT(n.std_err, 0.0);
  EXPECT_LE(std::abs(n.value - 1.0), 3 * n.std_err);
  const auto v = vi_mc(s, s, {3000, 1.0, 5});
  EXPECT_LE(std::abs(v.value), 3 * v.std_err);
}

TEST(MonteCarlo, AgreesWithKtOnSeparatedClusters) {
  RowMatrix m(16, 1);
  for (Eigen::Index i = 0; i < 16; ++i) m(i, 0) = 40.0 * static_cast<double>(i % 4);
  const PosteriorSet s(m, RowMatrix::Constant(16, 1, 0.5));
  RowMatrix m2(16, 1);
  for (Eigen::Index i = 0; i < 16; ++i) m2(i, 0) = 40.0 * static_cast<double>(i % 2);
  const PosteriorSet s2(m2, RowMatrix::Constant(16, 1, 0.5));
  const auto kt = nmi(fingerprint_gaussian(s), fingerprint_gaussian(s2));
  const auto mc = nmi_mc(s, s2, {2000, 1.0, 1});
  EXPECT_NEAR(kt.value, 1.0 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(mc.value, kt.value, std::max(3 * mc.std_err, 1e-9));
}

TEST(Cka, Properties) {
  std::mt19937_64 rng(15);
  const auto a = fingerprint_gaussian(random_set(30, 2, rng));
  EXPECT_NEAR(cka_bc(a, a).value, 1.0, 1e-12);
  const auto u = fingerprint_hard(HardClustering({0, 0, 1, 1, 0, 0, 1, 1}));
  const auto w = fingerprint_hard(HardClustering({0, 1, 0, 1, 0, 1, 0, 1}));
  EXPECT_NEAR(cka_bc(u, w).value, 0.0, 1e-12);
  for (int t = 0; t < 20; ++t) {
    const auto x = fingerprint_gaussian(random_set(30, 1, rng));
    const auto y = fingerprint_gaussian(random_set(30, 2, rng));
    const double c = cka_bc(x, y).value;
    EXPECT_EQ(c, cka_bc(y, x).value);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
  }
  EXPECT_FALSE(cka_bc(Fingerprint::ones(5), Fingerprint::identity(5)).defined);
}

TEST(Transforms, DistanceAndSimilarity) {
  EXPECT_EQ(nmi_to_distance(1.0), 0.0);
  EXPECT_NEAR(nmi_to_distance(0.0), -std::log(1e-4), 1e-12);
  EXPECT_NEAR(nmi_to_distance(0.5), std::log(2.0), 1e-15);
  EXPECT_NEAR(vi_to_similarity(1.0), 0.5, 1e-15);
  EXPECT_EQ(vi_to_similarity(0.0), 1.0);
}
