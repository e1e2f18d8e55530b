#pragma once

// Estimators of I(X; .), the information a representation space (or a joint
// of several) carries about the identity of a datum in the sample.
//
// Internals accumulate in nats; every public value is reported in bits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "infocomp/core.hpp"

namespace infocomp {

enum class Estimator { kt_bound, monte_carlo, exact_discrete };

constexpr std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::kt_bound: return "kt_bound";
    case Estimator::monte_carlo: return "monte_carlo";
    case Estimator::exact_discrete: return "exact_discrete";
  }
  return "unknown";
}

struct InfoEstimate {
  double bits = 0.0;
  double std_err = 0.0;
  Estimator estimator = Estimator::kt_bound;
  std::size_t n_support = 0;
};

struct McConfig {
  std::size_t n_samples = 10000;
  double agg_fraction = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    require(n_samples >= 1, Errc::config, "n_samples must be >= 1");
    require(agg_fraction > 0.0 && agg_fraction <= 1.0, Errc::config, "agg_fraction must lie in (0, 1]");
  }
};

inline constexpr double kLn2 = std::numbers::ln2;

namespace detail {

// -mean_i ln(r_i / N) for fingerprint row sums r_i.
inline double kt_nats_from_row_sums(const Vector& row_sums) {
  const double n = static_cast<double>(row_sums.size());
  return -(row_sums.array() / n).log().sum() / n;
}

// KT bound (nats) of the joint space whose fingerprint is a .* b. Both are
// symmetric, so column sums equal row sums.
inline double kt_joint_nats(const Matrix& a, const Matrix& b) {
  return kt_nats_from_row_sums(a.cwiseProduct(b).colwise().sum().transpose());
}

inline double kt_nats(const Matrix& a) { return kt_nats_from_row_sums(a.colwise().sum().transpose()); }

inline double log_sum_exp(std::span<const double> v) {
  const double hi = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

}  // namespace detail

/// Pairwise-distinguishability lower bound on I(X;U):
///   -(1/N) sum_i log2( (1/N) sum_j BC_ij ).
/// Lies in [0, log2 N]; equals the label entropy for hard clusterings.
inline InfoEstimate info_kt(const Fingerprint& f) {
  return {detail::kt_nats(f.values()) / kLn2, 0.0, Estimator::kt_bound, f.size()};
}

/// Monte Carlo estimate of I(X;U) = E_x E_{u~p(u|x)} log p(u|x) / p(u), with
/// p(u) the aggregated posterior over the sample (or over a fixed random
/// subset of it when cfg.agg_fraction < 1).
inline InfoEstimate info_mc(const PosteriorSet& space, const McConfig& cfg) {
  cfg.validate();
  const auto n = space.size();
  const auto d = static_cast<Eigen::Index>(space.dim());
  const auto& means = space.means();
  const auto& sds = space.stddevs();

  std::mt19937_64 rng(cfg.seed);

  std::vector<std::size_t> agg(n);
  std::iota(agg.begin(), agg.end(), std::size_t{0});
  if (cfg.agg_fraction < 1.0) {
    const auto m = static_cast<std::size_t>(std::ceil(cfg.agg_fraction * static_cast<double>(n)));
    std::shuffle(agg.begin(), agg.end(), rng);
    agg.resize(std::max<std::size_t>(1, m));
    std::sort(agg.begin(), agg.end());
  }
  const double log_agg = std::log(static_cast<double>(agg.size()));

  // sum_k log sigma_ik; the Gaussian normalizer shared by every component cancels.
  Vector log_norm(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) log_norm[static_cast<Eigen::Index>(i)] = sds.row(static_cast<Eigen::Index>(i)).array().log().sum();

  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector u(d);
  std::vector<double> terms(agg.size());

  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t t = 0; t < cfg.n_samples; ++t) {
    const auto x = static_cast<Eigen::Index>(pick(rng));
    double own = -log_norm[x];
    for (Eigen::Index k = 0; k < d; ++k) {
      const double z = gauss(rng);
      u[k] = means(x, k) + sds(x, k) * z;
      own -= 0.5 * z * z;
    }
    for (std::size_t a = 0; a < agg.size(); ++a) {
      const auto l = static_cast<Eigen::Index>(agg[a]);
      double lp = -log_norm[l];
      for (Eigen::Index k = 0; k < d; ++k) {
        const double z = (u[k] - means(l, k)) / sds(l, k);
        lp -= 0.5 * z * z;
      }
      terms[a] = lp;
    }
    const double ratio = own - (detail::log_sum_exp(terms) - log_agg);
    const double delta = ratio - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (ratio - mean);
  }

  const auto ns = static_cast<double>(cfg.n_samples);
  const double se = cfg.n_samples > 1 ? std::sqrt(m2 / (ns - 1.0)) / std::sqrt(ns)
                                      : std::numeric_limits<double>::infinity();
  return {mean / kLn2, se / kLn2, Estimator::monte_carlo, agg.size()};
}

/// Monte Carlo estimate of I(X; U1, ..., Um). Posteriors factorize given the
/// datum, so the joint is the concatenated space; a space listed twice is
/// sampled twice independently (the self-joint U, U').
inline InfoEstimate info_mc_joint(std::span<const PosteriorSet> spaces, const McConfig& cfg) {
  return info_mc(concat_spaces(spaces), cfg);
}

inline constexpr std::size_t kDefaultJointCellCap = std::size_t{1} << 20;

/// Exact I(X; V1, ..., Vm) for discrete (soft or hard) clusterings that are
/// conditionally independent given the datum:
///   H( (1/N) sum_x prod_k p(v_k|x) ) - (1/N) sum_x sum_k H(p(v_k|x)).
inline InfoEstimate info_exact_discrete(std::span<const DiscreteSoftClustering> clusts,
                                        std::size_t cell_cap = kDefaultJointCellCap) {
  require(!clusts.empty(), Errc::input, "no clusterings given");
  const auto n = clusts.front().size();
  std::size_t cells = 1;
  for (const auto& c : clusts) {
    detail::require_aligned(clusts.front().sample_ids(), c.sample_ids());
    const auto k = static_cast<std::size_t>(c.clusters());
    require(cells <= cell_cap / k, Errc::resource,
            "joint table exceeds the cap of " + std::to_string(cell_cap) + " cells");
    cells *= k;
  }

  auto entropy_nats = [](auto&& probs) {
    double h = 0.0;
    for (double p : probs)
      if (p > 0.0) h -= p * std::log(p);
    return h;
  };

  std::vector<double> joint(cells, 0.0);
  double cond = 0.0;
  const auto m = clusts.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> support(m);
  for (std::size_t x = 0; x < n; ++x) {
    const auto row = static_cast<Eigen::Index>(x);
    for (std::size_t c = 0; c < m; ++c) {
      const auto& mem = clusts[c].memberships();
      support[c].clear();
      for (Eigen::Index k = 0; k < mem.cols(); ++k)
        if (mem(row, k) > 0.0) support[c].emplace_back(static_cast<std::size_t>(k), mem(row, k));
      cond += entropy_nats(std::span<const double>(mem.row(row).data(), static_cast<std::size_t>(mem.cols())));
    }
    // Enumerate only the nonzero cells of prod_k p(v_k|x) (mixed radix, clustering 0 most significant).
    std::vector<std::size_t> pos(m, 0);
    bool done = false;
    while (!done) {
      std::size_t cell = 0;
      double p = 1.0;
      for (std::size_t c = 0; c < m; ++c) {
        cell = cell * static_cast<std::size_t>(clusts[c].clusters()) + support[c][pos[c]].first;
        p *= support[c][pos[c]].second;
      }
      joint[cell] += p;
      std::size_t c = m;
      while (true) {
        if (c == 0) {
          done = true;
          break;
        }
        --c;
        if (++pos[c] < support[c].size()) break;
        pos[c] = 0;
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& p : joint) p *= inv_n;
  const double info = entropy_nats(joint) - cond * inv_n;
  return {info / kLn2, 0.0, Estimator::exact_discrete, n};
}

inline InfoEstimate info_exact_discrete(std::span<const HardClustering> clusts,
                                        std::size_t cell_cap = kDefaultJointCellCap) {
  std::vector<DiscreteSoftClustering> soft;
  soft.reserve(clusts.size());
  for (const auto& h : clusts) soft.push_back(DiscreteSoftClustering::one_hot(h));
  return info_exact_discrete(std::span<const DiscreteSoftClustering>(soft), cell_cap);
}

/// H(X) in bits for a sample of n equally likely data.
inline double entropy_dataset(std::size_t n) {
  require(n >= 1, Errc::input, "dataset size must be >= 1");
  return std::log2(static_cast<double>(n));
}

enum class ViErrorMode {
  sum_of_squares,  // sqrt(4 d_uv^2 + d_uu^2 + d_vv^2)
  as_printed,      // sqrt(4 d_uv^2 - d_uu^2 - d_vv^2); may be undefined
};

/// Standard error of VI = 2 I(X;U,V) - I(X;U,U') - I(X;V,V') from the
/// standard errors of its three terms.
inline double propagate_vi_error(double d_uv, double d_uu, double d_vv,
                                 ViErrorMode mode = ViErrorMode::sum_of_squares) {
  require(d_uv >= 0.0 && d_uu >= 0.0 && d_vv >= 0.0, Errc::input, "standard errors must be nonnegative");
  const double sq = 4.0 * d_uv * d_uv;
  if (mode == ViErrorMode::sum_of_squares) return std::sqrt(sq + d_uu * d_uu + d_vv * d_vv);
  const double radicand = sq - d_uu * d_uu - d_vv * d_vv;
  require(radicand >= 0.0, Errc::numeric_domain,
          "as-printed VI error has a negative radicand (" + std::to_string(radicand) + ")");
  return std::sqrt(radicand);
}

struct Measurement {
  double value = 0.0;
  double std_err = 0.0;
};

/// Inverse-variance weighted mean and its standard error (sum w_i)^(-1/2).
/// All-exact inputs (std_err == 0) fall back to an unweighted mean.
inline Measurement weighted_mean(std::span<const Measurement> values) {
  require(!values.empty(), Errc::input, "weighted mean of an empty list");
  const auto exact = std::count_if(values.begin(), values.end(), [](const Measurement& m) { return m.std_err == 0.0; });
  if (exact == static_cast<std::ptrdiff_t>(values.size())) {
    double s = 0.0;
    for (const auto& m : values) s += m.value;
    return {s / static_cast<double>(values.size()), 0.0};
  }
  require(exact == 0, Errc::input, "cannot weight exact and uncertain values together");
  double wsum = 0.0;
  double acc = 0.0;
  for (const auto& m : values) {
    require(std::isfinite(m.std_err) && m.std_err > 0.0, Errc::input, "standard errors must be positive and finite");
    const double w = 1.0 / (m.std_err * m.std_err);
    wsum += w;
    acc += w * m.value;
  }
  return {acc / wsum, 1.0 / std::sqrt(wsum)};
}

}  // namespace infocomp
