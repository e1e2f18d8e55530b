#pragma once

// Synthetic spaces with known structure and the metrics used to score them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "infocomp/core.hpp"

namespace infocomp {

// ---------------------------------------------------------------- generators

/// k well separated clusters on a line (centres 20 apart, stddev 0.5);
/// point i belongs to cluster i mod k and sits exactly on its centre.
struct SeparatedGaussians {
  PosteriorSet space;
  HardClustering labels;
};

inline SeparatedGaussians gen_separated_gaussians(std::size_t k, std::size_t n) {
  require(k >= 1, Errc::config, "need at least one cluster");
  require(n >= std::max<std::size_t>(k, 4), Errc::config, "need n >= max(k, 4)");
  RowMatrix m(static_cast<Eigen::Index>(n), 1), s(static_cast<Eigen::Index>(n), 1);
  std::vector<int> lab(n);
  for (std::size_t i = 0; i < n; ++i) {
    lab[i] = static_cast<int>(i % k);
    m(static_cast<Eigen::Index>(i), 0) = 20.0 * lab[i];
    s(static_cast<Eigen::Index>(i), 0) = 0.5;
  }
  auto ids = index_ids(n);
  return {PosteriorSet(m, s, ids, "separated" + std::to_string(k)), HardClustering(lab, static_cast<int>(k), ids)};
}

struct LabeledSpace {
  std::string label;
  PosteriorSet space;
};

/// Nine spaces over the same n points.
///   i    line, spacing 1, stddev 0.5
///   ii   square grid, spacing 1, stddev 0.1 (nearly hard)
///   iii  line, stddev 2 (noisy i)
///   iv   arc of radius 15 with unit arc spacing, stddev 0.5 (i bent)
///   v    line positions shuffled by the seed, stddev 0.5
///   vi   exponential warp of i with stddev following the local stretch
///   vii  two groups at -5 / +5 in 1-D, stddev 0.5
///   viii broad blob: means 0.3 z, stddev 3
///   ix   the partition of vii in 2-D at (0,0) / (6,8), stddev 0.8
/// i, iv and vi share their neighbour overlaps; vii and ix are 1-bit splits.
inline std::vector<LabeledSpace> gen_nine_space_suite(std::size_t n = 64, std::uint64_t seed = 0) {
  require(n >= 8, Errc::config, "nine-space suite needs n >= 8");
  const auto rows = static_cast<Eigen::Index>(n);
  const auto ids = index_ids(n);
  std::mt19937_64 rng(seed);
  std::vector<LabeledSpace> out;
  auto add = [&](std::string label, RowMatrix m, RowMatrix s) {
    out.push_back({label, PosteriorSet(std::move(m), std::move(s), ids, label)});
  };
  auto x = [](Eigen::Index i) { return static_cast<double>(i); };

  {
    RowMatrix m(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) m(i, 0) = x(i);
    add("i", m, RowMatrix::Constant(rows, 1, 0.5));
  }
  {
    const auto side = static_cast<Eigen::Index>(std::ceil(std::sqrt(static_cast<double>(n))));
    RowMatrix m(rows, 2);
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, 0) = x(i % side);
      m(i, 1) = x(i / side);
    }
    add("ii", m, RowMatrix::Constant(rows, 2, 0.1));
  }
  {
    RowMatrix m(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) m(i, 0) = x(i);
    add("iii", m, RowMatrix::Constant(rows, 1, 2.0));
  }
  {
    constexpr double radius = 15.0;
    RowMatrix m(rows, 2);
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, 0) = radius * std::cos(x(i) / radius);
      m(i, 1) = radius * std::sin(x(i) / radius);
    }
    add("iv", m, RowMatrix::Constant(rows, 2, 0.5));
  }
  {
    std::vector<Eigen::Index> perm(n);
    for (Eigen::Index i = 0; i < rows; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    RowMatrix m(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) m(i, 0) = x(perm[static_cast<std::size_t>(i)]);
    add("v", m, RowMatrix::Constant(rows, 1, 0.5));
  }
  {
    const double a = 3.0 / static_cast<double>(n);
    RowMatrix m(rows, 1), s(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, 0) = std::expm1(a * x(i)) / a;
      s(i, 0) = 0.5 * std::exp(a * x(i));
    }
    add("vi", m, s);
  }
  {
    RowMatrix m(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) m(i, 0) = 2 * i < rows ? -5.0 : 5.0;
    add("vii", m, RowMatrix::Constant(rows, 1, 0.5));
  }
  {
    std::normal_distribution<double> z;
    RowMatrix m(rows, 2);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index k = 0; k < 2; ++k) m(i, k) = 0.3 * z(rng);
    add("viii", m, RowMatrix::Constant(rows, 2, 3.0));
  }
  {
    RowMatrix m(rows, 2);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const bool upper = 2 * i >= rows;
      m(i, 0) = upper ? 6.0 : 0.0;
      m(i, 1) = upper ? 8.0 : 0.0;
    }
    add("ix", m, RowMatrix::Constant(rows, 2, 0.8));
  }
  return out;
}

/// A simulated weak learner of a circular factor: the circle is cut at a
/// random gap and unrolled onto [-2, 2] with a random orientation, so the two
/// points adjacent across the cut land at opposite ends.
struct So2Learner {
  PosteriorSet space;
  std::vector<double> angles;  // generative factor per point
  std::size_t cut = 0;         // the gap between point cut and point cut+1 (mod n)
  int orientation = 1;
};

inline So2Learner gen_so2_weak(std::size_t n = 200, std::uint64_t seed = 0, double noise = 0.1) {
  require(n >= 16, Errc::config, "so2 learner needs n >= 16");
  require(noise > 0.0, Errc::config, "noise must be positive");
  std::mt19937_64 rng(seed);
  So2Learner l;
  l.cut = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  l.orientation = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
  const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  RowMatrix m(static_cast<Eigen::Index>(n), 1), s(static_cast<Eigen::Index>(n), 1);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / nd;
    l.angles.push_back(theta);
    const double t = (static_cast<double>((i + n - l.cut - 1) % n) + 0.5) / nd;
    m(static_cast<Eigen::Index>(i), 0) = l.orientation * (4.0 * t - 2.0);
    s(static_cast<Eigen::Index>(i), 0) = noise * (1.0 + 0.3 * std::sin(theta + phase));
  }
  l.space = PosteriorSet(m, s, index_ids(n), "so2_" + std::to_string(seed));
  return l;
}

/// Ensemble whose channels fall into known groups.
struct PlantedEnsemble {
  std::vector<PosteriorSet> models;
  std::vector<int> planted;  // per channel (model-major), group or -1 for uninformative
  RowMatrix factors;         // N x groups, the ground-truth fragments
};

struct PlantedConfig {
  std::size_t n_points = 1000;
  std::size_t groups = 5;
  std::size_t models = 50;
  std::size_t dims = 10;
  std::size_t informative_per_model = 5;
  double noise = 0.05;
  std::uint64_t seed = 0;

  void validate() const {
    require(n_points >= 4, Errc::config, "n_points must be >= 4");
    require(groups >= 1 && models >= 1 && dims >= 1, Errc::config, "groups, models and dims must be positive");
    require(informative_per_model <= std::min(groups, dims), Errc::config,
            "informative_per_model must not exceed min(groups, dims)");
    require(noise >= 0.0, Errc::config, "noise must be nonnegative");
  }
};

/// Factors are uniform on [-1, 1]. Each informative channel is a random
/// affine re-embedding a (f + noise z) + b with posterior stddev 0.1 |a|;
/// uninformative channels have means 0.01 z and unit stddev.
inline PlantedEnsemble gen_planted_channels(const PlantedConfig& cfg = {}) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(cfg.n_points);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  std::normal_distribution<double> z;

  PlantedEnsemble e;
  e.factors.resize(n, static_cast<Eigen::Index>(cfg.groups));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index g = 0; g < e.factors.cols(); ++g) e.factors(i, g) = unit(rng);

  const auto ids = index_ids(cfg.n_points);
  const auto d = static_cast<Eigen::Index>(cfg.dims);
  for (std::size_t m = 0; m < cfg.models; ++m) {
    std::vector<int> group_ids(cfg.groups);
    for (std::size_t g = 0; g < cfg.groups; ++g) group_ids[g] = static_cast<int>(g);
    std::shuffle(group_ids.begin(), group_ids.end(), rng);
    std::vector<int> assign(cfg.dims, -1);
    std::copy_n(group_ids.begin(), cfg.informative_per_model, assign.begin());
    std::shuffle(assign.begin(), assign.end(), rng);

    RowMatrix mean(n, d), sd(n, d);
    for (Eigen::Index k = 0; k < d; ++k) {
      const int g = assign[static_cast<std::size_t>(k)];
      if (g < 0) {
        for (Eigen::Index i = 0; i < n; ++i) {
          mean(i, k) = 0.01 * z(rng);
          sd(i, k) = 1.0;
        }
        continue;
      }
      const double a = (std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0) * scale(rng);
      const double b = unit(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        mean(i, k) = a * (e.factors(i, g) + cfg.noise * z(rng)) + b;
        sd(i, k) = 0.1 * std::abs(a);
      }
    }
    e.planted.insert(e.planted.end(), assign.begin(), assign.end());
    char name[32];
    std::snprintf(name, sizeof name, "model%03zu", m);
    e.models.emplace_back(std::move(mean), std::move(sd), ids, name);
  }
  return e;
}

/// Points evenly spaced on a circle of the given radius, isotropic stddev.
inline PosteriorSet gen_uniform_circle(std::size_t n, double radius = 1.0, double stddev = 0.1) {
  require(n >= 4, Errc::config, "need n >= 4");
  RowMatrix m(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    m(static_cast<Eigen::Index>(i), 0) = radius * std::cos(t);
    m(static_cast<Eigen::Index>(i), 1) = radius * std::sin(t);
  }
  return PosteriorSet(m, RowMatrix::Constant(static_cast<Eigen::Index>(n), 2, stddev), "circle");
}

// ------------------------------------------------------------------- metrics

/// Inclusive linear-interpolation percentile (p in [0, 100]).
inline double percentile(std::vector<double> v, double p) {
  require(!v.empty(), Errc::input, "percentile of an empty list");
  require(p >= 0.0 && p <= 100.0, Errc::input, "percentile must lie in [0, 100]");
  std::sort(v.begin(), v.end());
  const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return v[lo];
  return v[lo] + frac * (v[hi] - v[lo]);
}

inline double percentile90(const std::vector<double>& v) { return percentile(v, 90.0); }

struct ContinuityResult {
  double ratio = 0.0;          // max / p90; lower is better
  bool infinite = false;       // some adjacent pair has zero overlap
  std::vector<double> ratios;  // per cyclic-adjacent pair, in order
};

/// Chord lengths on the unit circle between cyclically adjacent points.
inline std::vector<double> chord_distances(std::span<const double> angles, std::span<const std::size_t> order) {
  std::vector<double> d;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double a = angles[order[i]];
    const double b = angles[order[(i + 1) % order.size()]];
    d.push_back(2.0 * std::abs(std::sin(0.5 * (a - b))));
  }
  return d;
}

/// Continuity ratio of a space along a cyclic datum order. Representation
/// distance is -ln BC between the two posteriors of each adjacent pair.
inline ContinuityResult continuity(const PosteriorSet& space, std::span<const std::size_t> order,
                                   std::span<const double> data_dist) {
  const std::size_t n = space.size();
  require(order.size() == n, Errc::input, "order must list every point exactly once");
  std::vector<char> seen(n, 0);
  for (auto o : order) {
    require(o < n && !seen[o], Errc::input, "order must list every point exactly once");
    seen[o] = 1;
  }
  require(data_dist.size() == n, Errc::input, "one data distance per adjacent pair expected");
  ContinuityResult r;
  for (std::size_t i = 0; i < n; ++i) {
    require(data_dist[i] > 0.0, Errc::input, "data distance must be positive (pair " + std::to_string(i) + ")");
    const double log_bc = log_bc_gaussian(space.posterior(order[i]), space.posterior(order[(i + 1) % n]));
    // a coefficient that underflows to zero is no overlap at all
    const double rep = std::exp(log_bc) == 0.0 ? std::numeric_limits<double>::infinity() : std::max(0.0, -log_bc);
    r.ratios.push_back(rep / data_dist[i]);
  }
  const double top = *std::max_element(r.ratios.begin(), r.ratios.end());
  const double p90 = percentile90(r.ratios);
  if (std::isinf(top) || p90 == 0.0) {
    r.infinite = top > 0.0;
    r.ratio = top > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    if (std::isinf(p90)) r.ratio = 1.0;
  } else {
    r.ratio = top / p90;
  }
  return r;
}

/// Adjusted Rand index. Negative labels in `found` are noise and each counts
/// as its own singleton group.
inline double group_agreement(std::span<const int> found, std::span<const int> planted) {
  require(!planted.empty(), Errc::input, "planted labels must be nonempty");
  require(found.size() == planted.size(), Errc::input, "label lists differ in length");
  const std::size_t n = planted.size();
  if (n < 2) return 1.0;
  std::vector<long> a(n);
  long next = 0;
  for (auto f : found) next = std::max<long>(next, f + 1);
  for (std::size_t i = 0; i < n; ++i) a[i] = found[i] >= 0 ? found[i] : next++;

  std::map<std::pair<long, int>, double> cells;
  std::map<long, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < n; ++i) {
    cells[{a[i], planted[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[planted[i]] += 1.0;
  }
  auto pairs = [](double c) { return c * (c - 1.0) / 2.0; };
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [k, c] : cells) index += pairs(c);
  for (const auto& [k, c] : rows) sa += pairs(c);
  for (const auto& [k, c] : cols) sb += pairs(c);
  const double expected = sa * sb / pairs(static_cast<double>(n));
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace infocomp
