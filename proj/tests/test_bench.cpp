#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "infocomp/bench.hpp"
#include "infocomp/similarity.hpp"

using namespace infocomp;

TEST(Percentile, HandComputedTenElements) {
  // sorted 1 1 2 3 4 5 6 8 9 10; p90 at position 8.1 -> 9 + 0.1 * (10 - 9)
  const std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6, 10, 8};
  EXPECT_NEAR(percentile90(v), 9.1, 1e-12);
  EXPECT_DOUBLE_EQ(percentile(v, 0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(v, 100), 10.0);
  EXPECT_DOUBLE_EQ(percentile(v, 50), 4.5);
}

TEST(NineSpace, InformationEquivalentTrio) {
  const auto suite = gen_nine_space_suite(64, 0);
  ASSERT_EQ(suite.size(), 9u);
  std::map<std::string, Fingerprint> f;
  for (const auto& s : suite) f[s.label] = fingerprint_gaussian(s.space);
  EXPECT_GT(nmi(f["i"], f["iv"]).value, 0.95);
  EXPECT_GT(nmi(f["i"], f["vi"]).value, 0.95);
  EXPECT_GT(nmi(f["iv"], f["vi"]).value, 0.95);
  EXPECT_NEAR(info_kt(f["vii"]).bits, 1.0, 1e-9);
  EXPECT_NEAR(info_kt(f["ix"]).bits, 1.0, 1e-6);
  double trio_min = 1.0, cross_max = 0.0;
  for (const auto* a : {"i", "iv", "vi"}) {
    for (const auto* b : {"i", "iv", "vi"}) trio_min = std::min(trio_min, nmi(f[a], f[b]).value);
    for (const auto* b : {"vii", "viii", "ix"}) cross_max = std::max(cross_max, nmi(f[a], f[b]).value);
  }
  EXPECT_GE(trio_min - cross_max, 0.3);
}

TEST(NineSpace, Deterministic) {
  const auto a = gen_nine_space_suite(64, 3), b = gen_nine_space_suite(64, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i].space.means() == b[i].space.means());
}

TEST(So2, CutIsTheOnlyValley) {
  const auto l = gen_so2_weak(200, 7);
  const std::size_t n = 200;
  int valleys = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double bc = bc_gaussian(l.space.posterior(i), l.space.posterior((i + 1) % n));
    if (i == l.cut) {
      EXPECT_LT(bc, 1e-6);
      ++valleys;
    } else {
      EXPECT_GT(bc, 0.5);
    }
  }
  EXPECT_EQ(valleys, 1);
}

TEST(So2, SeedsChangeTheCut) {
  std::set<std::size_t> cuts;
  for (std::uint64_t s = 0; s < 20; ++s) cuts.insert(gen_so2_weak(200, s).cut);
  EXPECT_GT(cuts.size(), 15u);
}

TEST(Continuity, UniformCircleIsOne) {
  const std::size_t n = 100;
  const auto s = gen_uniform_circle(n, 1.0, 0.05);
  std::vector<std::size_t> order(n);
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = i;
    angles[i] = 2 * M_PI * static_cast<double>(i) / n;
  }
  const auto d = chord_distances(angles, order);
  const auto r = continuity(s, order, d);
  EXPECT_NEAR(r.ratio, 1.0, 1e-9);
  EXPECT_FALSE(r.infinite);
  // doubling every stddev scales -ln BC by 1/4 uniformly
  const auto wide = gen_uniform_circle(n, 1.0, 0.1);
  EXPECT_NEAR(continuity(wide, order, d).ratio, r.ratio, 1e-9);
  EXPECT_NEAR(continuity(wide, order, d).ratios[0], r.ratios[0] / 4, 1e-9);
}

TEST(Continuity, WeakLearnerHasLargeRatio) {
  const auto l = gen_so2_weak(200, 1);
  std::vector<std::size_t> order(200);
  for (std::size_t i = 0; i < 200; ++i) order[i] = i;
  const auto r = continuity(l.space, order, chord_distances(l.angles, order));
  EXPECT_GT(r.ratio, 10.0);
}

TEST(Continuity, ZeroOverlapIsFlagged) {
  RowMatrix m(4, 1);
  m << 0, 0.1, 0.2, 1e6;
  const PosteriorSet s(m, RowMatrix::Constant(4, 1, 0.1));
  const std::vector<std::size_t> order{0, 1, 2, 3};
  const std::vector<double> d(4, 1.0);
  const auto r = continuity(s, order, d);
  EXPECT_TRUE(r.infinite);
  EXPECT_TRUE(std::isinf(r.ratio));
}

TEST(Continuity, Validation) {
  const auto s = gen_uniform_circle(4);
  const std::vector<std::size_t> bad{0, 1, 1, 2}, ok{0, 1, 2, 3};
  const std::vector<double> d(4, 1.0), zero{1, 0, 1, 1};
  EXPECT_THROW(continuity(s, bad, d), Error);
  EXPECT_THROW(continuity(s, ok, zero), Error);
}

TEST(Agreement, AdjustedRand) {
  const std::vector<int> a{0, 0, 1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(group_agreement(a, a), 1.0);
  const std::vector<int> renamed{5, 5, 3, 3, 0, 0};
  EXPECT_DOUBLE_EQ(group_agreement(renamed, a), 1.0);
  // sklearn adjusted_rand_score([0,0,1,1],[0,0,1,2]) = 0.5714285714285715
  const std::vector<int> x{0, 0, 1, 1}, y{0, 0, 1, 2};
  EXPECT_NEAR(group_agreement(y, x), 0.5714285714285715, 1e-12);
  // noise points count as singletons
  const std::vector<int> noisy{0, 0, 1, -1};
  EXPECT_NEAR(group_agreement(noisy, x), 0.5714285714285715, 1e-12);
  std::mt19937_64 rng(1);
  double mean = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<int> p(200), q(200);
    for (auto& v : p) v = static_cast<int>(rng() % 5);
    for (auto& v : q) v = static_cast<int>(rng() % 5);
    mean += group_agreement(p, q) / 50;
  }
  EXPECT_NEAR(mean, 0.0, 0.02);
}

TEST(Planted, ZeroNoiseGroupsAreIdentical) {
  PlantedConfig c;
  c.n_points = 200;
  c.models = 4;
  c.noise = 0.0;
  const auto e = gen_planted_channels(c);
  std::map<int, std::vector<Fingerprint>> by_group;
  for (std::size_t m = 0; m < e.models.size(); ++m)
    for (std::size_t k = 0; k < c.dims; ++k) {
      const int g = e.planted[m * c.dims + k];
      if (g >= 0) by_group[g].push_back(fingerprint_gaussian(marginal_channel(e.models[m], k)));
    }
  for (auto& [g, fps] : by_group)
    for (std::size_t i = 1; i < fps.size(); ++i) EXPECT_NEAR(nmi(fps[0], fps[i]).value, 1.0, 1e-6);
}

TEST(Planted, UninformativeDimsAreBelowThreshold) {
  PlantedConfig c;
  c.n_points = 300;
  c.models = 3;
  const auto e = gen_planted_channels(c);
  for (std::size_t m = 0; m < e.models.size(); ++m)
    for (std::size_t k = 0; k < c.dims; ++k) {
      const double bits = info_kt(fingerprint_gaussian(marginal_channel(e.models[m], k))).bits;
      if (e.planted[m * c.dims + k] < 0) {
        EXPECT_LT(bits, 0.005);
      } else {
        EXPECT_GT(bits, 0.5);
      }
    }
}

TEST(Planted, ParameterValidation) {
  PlantedConfig c;
  c.informative_per_model = 6;
  EXPECT_THROW(gen_planted_channels(c), Error);
}
