#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "json.hpp"

#include "infocomp/optics.hpp"

using namespace infocomp;

namespace {

struct Case {
  Matrix dist;
  std::size_t min_samples;
  double xi;
  std::vector<std::size_t> ordering;
  std::vector<double> reach;  // by original index
  std::vector<double> core;
  std::vector<long> pred;
  std::vector<int> labels;
};

std::vector<Case> load_cases() {
  std::ifstream in(std::string(INFOCOMP_TEST_DATA) + "/optics_sklearn.json");
  const auto j = nlohmann::json::parse(in);
  std::vector<Case> out;
  for (const auto& c : j) {
    Case k;
    const auto d = c["dist"].get<std::vector<std::vector<double>>>();
    k.dist.resize(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j2 = 0; j2 < d.size(); ++j2) k.dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j2)) = d[i][j2];
    k.min_samples = c["min_samples"];
    k.xi = c["xi"];
    k.ordering = c["ordering"].get<std::vector<std::size_t>>();
    for (const auto& r : c["reachability"]) k.reach.push_back(r.is_null() ? kInf : r.get<double>());
    k.core = c["core"].get<std::vector<double>>();
    k.pred = c["predecessor"].get<std::vector<long>>();
    k.labels = c["labels"].get<std::vector<int>>();
    out.push_back(std::move(k));
  }
  return out;
}

// Partition equality up to renaming of group ids; noise must match exactly.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    auto [x, inserted_a] = ab.emplace(a[i], b[i]);
    auto [y, inserted_b] = ba.emplace(b[i], a[i]);
    if (x->second != b[i] || y->second != a[i]) return false;
  }
  return true;
}

}  // namespace

TEST(Optics, MatchesReferenceImplementation) {
  const auto cases = load_cases();
  ASSERT_FALSE(cases.empty());
  for (const auto& c : cases) {
    const auto r = optics(c.dist, c.min_samples, c.xi);
    EXPECT_EQ(r.ordering, c.ordering);
    for (std::size_t p = 0; p < r.ordering.size(); ++p) {
      const auto i = r.ordering[p];
      if (std::isinf(c.reach[i])) {
        EXPECT_TRUE(std::isinf(r.reachability[p]));
      } else {
        EXPECT_NEAR(r.reachability[p], c.reach[i], 1e-12);
      }
      EXPECT_NEAR(r.core_distances[p], c.core[i], 1e-12);
      EXPECT_EQ(r.predecessor[p], c.pred[i]);
    }
    EXPECT_TRUE(same_partition(r.labels(), c.labels));
  }
}

TEST(Optics, CoreDistanceIsKthSmallestIncludingSelf) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 10);
  const int n = 25;
  Matrix pts(n, 2);
  for (int i = 0; i < n; ++i) pts.row(i) << u(rng), u(rng);
  Matrix d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
  const auto r = optics_order(d, 4);
  for (std::size_t p = 0; p < r.ordering.size(); ++p) {
    std::vector<double> row(d.row(static_cast<Eigen::Index>(r.ordering[p])).data(),
                            d.row(static_cast<Eigen::Index>(r.ordering[p])).data() + n);
    std::vector<double> sorted;
    for (int j = 0; j < n; ++j) sorted.push_back(d(static_cast<Eigen::Index>(r.ordering[p]), j));
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(r.core_distances[p], sorted[3]);
  }
  // brute force: each reachability is the minimum over already ordered points
  for (std::size_t p = 1; p < r.ordering.size(); ++p) {
    double best = kInf;
    for (std::size_t q = 0; q < p; ++q) {
      const auto a = static_cast<Eigen::Index>(r.ordering[q]), b = static_cast<Eigen::Index>(r.ordering[p]);
      best = std::min(best, std::max(d(a, b), r.core_distances[q]));
    }
    EXPECT_EQ(r.reachability[p], best);
  }
}

TEST(Optics, TwoObviousGroups) {
  const int n = 40;
  Matrix d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d(i, j) = i == j ? 0.0 : ((i < 20) == (j < 20) ? 0.1 + 0.001 * ((i * 7 + j * 7) % 13) : 5.0);
  const auto r = optics(d, 5, 0.05);
  ASSERT_EQ(r.groups.size(), 2u);
  const auto lab = r.labels();
  for (int i = 0; i < n; ++i) EXPECT_EQ(lab[static_cast<std::size_t>(i)], lab[i < 20 ? 0 : 20]);
  EXPECT_NE(lab[0], lab[20]);
}

TEST(Optics, Validation) {
  EXPECT_THROW(optics_order(Matrix::Zero(5, 5), 6), Error);
  Matrix d = Matrix::Zero(5, 5);
  d(0, 1) = -1;
  EXPECT_THROW(optics_order(d, 2), Error);
  OpticsResult r = optics_order(Matrix::Zero(5, 5), 2);
  EXPECT_THROW(extract_groups(r, 1.5), Error);
}
