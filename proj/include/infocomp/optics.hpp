#pragma once

// OPTICS ordering over a precomputed distance matrix and xi-steepness group
// extraction from the reachability profile.
//
// Conventions follow the common scikit-learn implementation: the core
// distance counts the point itself among its min_samples neighbours, the next
// point is the unprocessed one with the smallest reachability (lowest index on
// ties), and extraction keeps only leaf clusters.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "infocomp/core.hpp"

namespace infocomp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct OpticsGroup {
  std::size_t begin = 0;  // first position in the ordering
  std::size_t end = 0;    // last position in the ordering (inclusive)
  std::vector<std::size_t> members;  // original indices, in ordering order
};

struct OpticsResult {
  std::vector<std::size_t> ordering;    // ordering[pos] = original index
  std::vector<double> reachability;     // by position; reachability[0] = +inf
  std::vector<double> core_distances;   // by position
  std::vector<std::ptrdiff_t> predecessor;  // by position; original index or -1
  std::vector<OpticsGroup> groups;
  std::size_t min_samples = 20;
  double xi = 0.05;

  /// Group id per original index, -1 for noise.
  std::vector<int> labels() const {
    std::vector<int> out(ordering.size(), -1);
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (auto m : groups[g].members) out[m] = static_cast<int>(g);
    return out;
  }
};

/// Orders the points of a distance matrix (nonnegative, zero diagonal).
inline OpticsResult optics_order(const Matrix& dist, std::size_t min_samples = 20) {
  const auto n = static_cast<std::size_t>(dist.rows());
  require(dist.rows() == dist.cols(), Errc::input, "distance matrix must be square");
  require(min_samples >= 2, Errc::config, "min_samples must be >= 2");
  require(n >= min_samples, Errc::config,
          "only " + std::to_string(n) + " points for min_samples = " + std::to_string(min_samples) +
              "; lower min_samples to at most the number of points");
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    require(dist(i, i) == 0.0, Errc::input, "distance matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < dist.cols(); ++j) {
      require(dist(i, j) >= 0.0 && !std::isnan(dist(i, j)), Errc::input, "distances must be nonnegative");
    }
  }

  std::vector<double> core(n);
  std::vector<double> scratch(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) scratch[j] = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(min_samples - 1), scratch.end());
    core[i] = scratch[min_samples - 1];
  }

  std::vector<double> reach(n, kInf);
  std::vector<std::ptrdiff_t> pred(n, -1);
  std::vector<char> processed(n, 0);
  OpticsResult r;
  r.min_samples = min_samples;
  r.ordering.reserve(n);

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t point = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (processed[i]) continue;
      if (point == n || reach[i] < reach[point]) point = i;
    }
    processed[point] = 1;
    r.ordering.push_back(point);
    if (!std::isfinite(core[point])) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (processed[j]) continue;
      const double rd = std::max(dist(static_cast<Eigen::Index>(point), static_cast<Eigen::Index>(j)), core[point]);
      if (rd < reach[j]) {
        reach[j] = rd;
        pred[j] = static_cast<std::ptrdiff_t>(point);
      }
    }
  }

  for (auto p : r.ordering) {
    r.reachability.push_back(reach[p]);
    r.core_distances.push_back(core[p]);
    r.predecessor.push_back(pred[p]);
  }
  return r;
}

namespace detail {

struct SteepDownArea {
  std::size_t start, end;
  double mib;
};

// Maximal steep region starting at `start`, allowing at most min_samples
// consecutive points that are neither steep nor moving the other way.
inline std::size_t extend_region(const std::vector<char>& steep, const std::vector<char>& xward, std::size_t start,
                                 std::size_t min_samples) {
  const std::size_t n = steep.size();
  std::size_t non_xward = 0;
  std::size_t end = start;
  for (std::size_t index = start; index < n; ++index) {
    if (steep[index]) {
      non_xward = 0;
      end = index;
    } else if (!xward[index]) {
      if (++non_xward > min_samples) break;
    } else {
      return end;
    }
  }
  return end;
}

inline void update_filter_sdas(std::vector<SteepDownArea>& sdas, double mib, double xi_complement,
                               const std::vector<double>& plot) {
  if (std::isinf(mib)) {
    sdas.clear();
    return;
  }
  std::erase_if(sdas, [&](const SteepDownArea& d) { return !(mib <= plot[d.start] * xi_complement); });
  for (auto& d : sdas) d.mib = std::max(d.mib, mib);
}

// Shrinks [s, e] until the end point's predecessor lies inside the cluster.
inline bool correct_predecessor(const std::vector<double>& plot, const std::vector<std::ptrdiff_t>& pred_plot,
                                const std::vector<std::size_t>& ordering, std::size_t& s, std::size_t& e) {
  while (s < e) {
    if (plot[s] > plot[e]) return true;
    const auto p_e = pred_plot[e];
    for (std::size_t i = s; i < e; ++i)
      if (p_e == static_cast<std::ptrdiff_t>(ordering[i])) return true;
    --e;
  }
  return false;
}

}  // namespace detail

/// Xi-steepness extraction. Groups are disjoint contiguous runs of the
/// ordering; points outside every valley are noise.
inline std::vector<OpticsGroup> extract_groups(const OpticsResult& r, double xi = 0.05,
                                               std::size_t min_cluster_size = 0) {
  require(xi > 0.0 && xi < 1.0, Errc::config, "xi must lie in (0, 1)");
  const std::size_t n = r.ordering.size();
  if (min_cluster_size == 0) min_cluster_size = r.min_samples;
  const std::size_t min_samples = r.min_samples;

  std::vector<double> plot = r.reachability;
  plot.push_back(kInf);
  const double xi_complement = 1.0 - xi;

  std::vector<char> steep_up(n), steep_down(n), down(n), up(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = plot[i] / plot[i + 1];  // NaN compares false
    steep_up[i] = ratio <= xi_complement;
    steep_down[i] = ratio >= 1.0 / xi_complement;
    down[i] = ratio > 1.0;
    up[i] = ratio < 1.0;
  }

  std::vector<std::pair<std::size_t, std::size_t>> clusters;
  std::vector<detail::SteepDownArea> sdas;
  std::size_t index = 0;
  double mib = 0.0;

  for (std::size_t steep_index = 0; steep_index < n; ++steep_index) {
    if (!(steep_up[steep_index] || steep_down[steep_index])) continue;
    if (steep_index < index) continue;
    mib = std::max(mib, *std::max_element(plot.begin() + static_cast<std::ptrdiff_t>(index),
                                          plot.begin() + static_cast<std::ptrdiff_t>(steep_index) + 1));

    if (steep_down[steep_index]) {
      detail::update_filter_sdas(sdas, mib, xi_complement, plot);
      const std::size_t d_end = detail::extend_region(steep_down, up, steep_index, min_samples);
      sdas.push_back({steep_index, d_end, 0.0});
      index = d_end + 1;
      mib = plot[index];
      continue;
    }

    detail::update_filter_sdas(sdas, mib, xi_complement, plot);
    const std::size_t u_start = steep_index;
    const std::size_t u_end = detail::extend_region(steep_up, down, u_start, min_samples);
    index = u_end + 1;
    mib = plot[index];

    std::vector<std::pair<std::size_t, std::size_t>> found;
    for (const auto& d : sdas) {
      std::size_t c_start = d.start;
      std::size_t c_end = u_end;
      if (plot[c_end + 1] * xi_complement < d.mib) continue;

      const double d_max = plot[d.start];
      if (d_max * xi_complement >= plot[c_end + 1]) {
        while (plot[c_start + 1] > plot[c_end + 1] && c_start < d.end) ++c_start;
      } else if (plot[c_end + 1] * xi_complement >= d_max) {
        while (plot[c_end - 1] > d_max && c_end > u_start) --c_end;
      }

      if (!detail::correct_predecessor(plot, r.predecessor, r.ordering, c_start, c_end)) continue;
      if (c_end - c_start + 1 < min_cluster_size) continue;
      if (c_start > d.end) continue;
      if (c_end < u_start) continue;
      found.emplace_back(c_start, c_end);
    }
    clusters.insert(clusters.end(), found.rbegin(), found.rend());
  }

  // Leaf clusters only: a cluster overlapping an already labelled one is skipped.
  std::vector<int> label(n, -1);
  std::vector<OpticsGroup> groups;
  for (const auto& [s, e] : clusters) {
    bool free = true;
    for (std::size_t p = s; p <= e; ++p) free = free && label[p] == -1;
    if (!free) continue;
    OpticsGroup g{s, e, {}};
    for (std::size_t p = s; p <= e; ++p) {
      label[p] = static_cast<int>(groups.size());
      g.members.push_back(r.ordering[p]);
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

/// Ordering plus xi groups in one call.
inline OpticsResult optics(const Matrix& dist, std::size_t min_samples = 20, double xi = 0.05) {
  OpticsResult r = optics_order(dist, min_samples);
  r.xi = xi;
  r.groups = extract_groups(r, xi);
  return r;
}

}  // namespace infocomp
