#pragma once

// Model fusion: gradient ascent on the posterior parameters of a synthesis
// space so that its fingerprint agrees, on average, with a fixed ensemble of
// fingerprints. Only the ensemble fingerprints are needed, never the data or
// the models that produced them.
//
// Objective terms are KT bounds in nats. For member V:
//   I(U;V)  = I_U + I_V - I_UV,   I(U;U') = 2 I_U - I_UU
//   avg_nmi:        I(U;V) / sqrt(I(U;U') I(V;V'))
//   avg_exp_neg_vi: exp(-(2 I_UV - I_UU - I_VV))
//   avg_mi:         I(U;V)
// Gradients flow through the row sums of the KT bound and the closed-form
// log-BC of diagonal Gaussians; stddevs are parameterized by their logarithm.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infocomp/similarity.hpp"

namespace infocomp {

enum class FusionObjective { avg_nmi, avg_exp_neg_vi, avg_mi };

constexpr std::string_view objective_name(FusionObjective o) {
  switch (o) {
    case FusionObjective::avg_nmi: return "avg_nmi";
    case FusionObjective::avg_exp_neg_vi: return "avg_exp_neg_vi";
    case FusionObjective::avg_mi: return "avg_mi";
  }
  return "unknown";
}

struct FusionConfig {
  FusionObjective objective = FusionObjective::avg_nmi;
  std::size_t latent_dim = 2;
  double learning_rate = 3.0;
  std::size_t steps = 20000;
  std::uint64_t seed = 0;
  double init_mean_scale = 0.1;
  double init_stddev = 1.0;

  void validate() const {
    require(latent_dim >= 1, Errc::config, "latent_dim must be >= 1");
    require(learning_rate > 0.0 && std::isfinite(learning_rate), Errc::config, "learning_rate must be positive");
    require(steps >= 1, Errc::config, "steps must be >= 1");
    require(init_mean_scale >= 0.0, Errc::config, "init_mean_scale must be nonnegative");
    require(init_stddev > 0.0, Errc::config, "init_stddev must be positive");
  }
};

struct FusionState {
  RowMatrix means;        // N x d
  RowMatrix log_stddevs;  // N x d
  std::size_t step = 0;
  std::vector<double> objective_trace;

  std::size_t size() const { return static_cast<std::size_t>(means.rows()); }
};

struct FusionGradient {
  RowMatrix means;
  RowMatrix log_stddevs;
};

/// Means ~ Normal(0, init_mean_scale) drawn row-major from cfg.seed;
/// log-stddevs = log(init_stddev).
inline FusionState initial_state(std::size_t n, const FusionConfig& cfg) {
  cfg.validate();
  const auto rows = static_cast<Eigen::Index>(n);
  const auto d = static_cast<Eigen::Index>(cfg.latent_dim);
  FusionState s;
  s.means.resize(rows, d);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < d; ++k) s.means(i, k) = cfg.init_mean_scale * gauss(rng);
  s.log_stddevs = RowMatrix::Constant(rows, d, std::log(cfg.init_stddev));
  return s;
}

/// The fixed ensemble with its self terms precomputed.
class FusionProblem {
 public:
  FusionProblem(std::span<const Fingerprint> ensemble, FusionObjective objective) : objective_(objective) {
    require(!ensemble.empty(), Errc::input, "fusion needs at least one ensemble member");
    ids_ = ensemble.front().sample_ids();
    for (const auto& f : ensemble) {
      detail::require_aligned(ids_, f.sample_ids());
      Eigen::ArrayXXd g = f.values().array();
      const double iv = detail::kt_nats(f.values());
      const double ivv = detail::kt_joint_nats(f.values(), f.values());
      if (objective_ == FusionObjective::avg_nmi) {
        require(2.0 * iv - ivv >= kMinSelfInfoBits * kLn2, Errc::input,
                "ensemble member '" + f.space_id() + "' carries no information; NMI undefined");
      }
      members_.push_back(std::move(g));
      self_v_.push_back(iv);
      self_joint_v_.push_back(ivv);
    }
  }

  std::size_t size() const { return ids_.size(); }
  std::size_t members() const { return members_.size(); }
  const std::vector<SampleId>& sample_ids() const { return ids_; }
  FusionObjective objective() const { return objective_; }

  /// Objective value; NaN when undefined (collapsed synthesis space under avg_nmi).
  double value(const FusionState& s) const { return evaluate(s, nullptr); }

  /// Objective value and its exact gradient.
  double value_and_gradient(const FusionState& s, FusionGradient& grad) const { return evaluate(s, &grad); }

 private:
  // Column segments of the lower triangle for the synthesis fingerprint, then
  // row sums; the gradient revisits the triangle once. Scratch buffers live in
  // the problem, so one FusionProblem must not be evaluated concurrently.
  double evaluate(const FusionState& s, FusionGradient* grad) const {
    const auto n = static_cast<Eigen::Index>(size());
    require(s.means.rows() == n && s.log_stddevs.rows() == n && s.means.cols() == s.log_stddevs.cols(), Errc::input,
            "state shape does not match the ensemble sample size");
    const auto d = s.means.cols();
    const std::size_t mcount = members_.size();
    const double nd = static_cast<double>(n);
    const double log_n = std::log(nd);
    const double half_log2 = 0.5 * std::log(2.0);

    mu_ = s.means.array();
    ls_ = s.log_stddevs.array();
    var_ = (2.0 * ls_).exp();
    b_.resize(n, n);
    seg_a_.resize(n);
    seg_b_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      b_(i, i) = 1.0;
      const Eigen::Index len = n - i - 1;
      if (len == 0) continue;
      auto lr = seg_a_.head(len);  // log ratio of scales
      auto dist = seg_b_.head(len);
      lr.setZero();
      dist.setZero();
      for (Eigen::Index k = 0; k < d; ++k) {
        const auto sv = var_.col(k).segment(i + 1, len) + var_(i, k);
        lr += half_log2 + 0.5 * (ls_.col(k).segment(i + 1, len) + ls_(i, k) - sv.log());
        dist += (mu_.col(k).segment(i + 1, len) - mu_(i, k)).square() / (4.0 * sv);
      }
      b_.col(i).segment(i + 1, len) = (lr.min(0.0) - dist).exp();
    }
    b_.matrix().triangularView<Eigen::StrictlyUpper>() = b_.matrix().transpose();

    // all matrices are symmetric, so row sums are taken as contiguous column sums
    r_u_ = b_.colwise().sum().transpose();
    r_uu_ = b_.square().colwise().sum().transpose();
    r_uv_.resize(n, static_cast<Eigen::Index>(mcount));
    for (std::size_t m = 0; m < mcount; ++m) r_uv_.col(static_cast<Eigen::Index>(m)) = (b_ * members_[m]).colwise().sum().transpose();
    auto kt = [&](const auto& r) { return log_n - r.log().sum() / nd; };
    const double i_u = kt(r_u_);
    const double i_uu = kt(r_uu_);
    const double s_u = 2.0 * i_u - i_uu;

    const double inv_m = 1.0 / static_cast<double>(mcount);
    double total = 0.0;
    double d_iu = 0.0;   // dObj / dI_U
    double d_iuu = 0.0;  // dObj / dI_UU
    d_uv_.assign(mcount, 0.0);
    for (std::size_t m = 0; m < mcount; ++m) {
      const double i_uv = kt(r_uv_.col(static_cast<Eigen::Index>(m)));
      const double mutual = i_u + self_v_[m] - i_uv;
      switch (objective_) {
        case FusionObjective::avg_nmi: {
          const double s_v = 2.0 * self_v_[m] - self_joint_v_[m];
          if (!(s_u >= kMinSelfInfoBits * kLn2)) return std::numeric_limits<double>::quiet_NaN();
          const double den = std::sqrt(s_u * s_v);
          total += mutual / den;
          d_iu += 1.0 / den - mutual / (s_u * den);
          d_iuu += mutual / (2.0 * s_u * den);
          d_uv_[m] = -1.0 / den;
          break;
        }
        case FusionObjective::avg_exp_neg_vi: {
          const double e = std::exp(-(2.0 * i_uv - i_uu - self_joint_v_[m]));
          total += e;
          d_iuu += e;
          d_uv_[m] = -2.0 * e;
          break;
        }
        case FusionObjective::avg_mi: {
          total += mutual;
          d_iu += 1.0;
          d_uv_[m] = -1.0;
          break;
        }
      }
    }
    total *= inv_m;
    if (!grad) return total;

    // dObj/dB_ij with row i owning the row sum, symmetrized onto log B_ij.
    w_ = b_.colwise() * (2.0 * d_iuu / r_uu_);
    w_.colwise() += d_iu / r_u_;
    for (std::size_t m = 0; m < mcount; ++m)
      w_ += members_[m].colwise() * (d_uv_[m] / r_uv_.col(static_cast<Eigen::Index>(m)));
    w_ *= -inv_m / nd;
    ws_ = w_ + w_.transpose();
    ws_ *= b_;

    // The diagonal contributes nothing.
    gmu_ = Eigen::ArrayXXd::Zero(n, d);
    gls_ = Eigen::ArrayXXd::Zero(n, d);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const Eigen::Index len = n - i - 1;
      const auto ws = ws_.col(i).segment(i + 1, len);
      for (Eigen::Index k = 0; k < d; ++k) {
        const auto sv = var_.col(k).segment(i + 1, len) + var_(i, k);
        auto gm = seg_a_.head(len);
        auto t = seg_b_.head(len);
        gm = ws * (mu_(i, k) - mu_.col(k).segment(i + 1, len)) / (2.0 * sv);
        t = (mu_(i, k) - mu_.col(k).segment(i + 1, len)).square() / (2.0 * sv.square()) - sv.inverse();
        gmu_(i, k) -= gm.sum();
        gmu_.col(k).segment(i + 1, len) += gm;
        gls_(i, k) += (ws * (0.5 + var_(i, k) * t)).sum();
        gls_.col(k).segment(i + 1, len) += ws * (0.5 + var_.col(k).segment(i + 1, len) * t);
      }
    }
    grad->means = gmu_.matrix();
    grad->log_stddevs = gls_.matrix();
    return total;
  }

  FusionObjective objective_;
  std::vector<SampleId> ids_;
  std::vector<Eigen::ArrayXXd> members_;
  std::vector<double> self_v_;        // I(X;V) in nats
  std::vector<double> self_joint_v_;  // I(X;V,V') in nats

  mutable Eigen::ArrayXXd mu_, ls_, var_, b_, w_, ws_, r_uv_, gmu_, gls_;
  mutable Eigen::ArrayXd r_u_, r_uu_, seg_a_, seg_b_;
  mutable std::vector<double> d_uv_;
};

inline double objective_value(const FusionState& state, std::span<const Fingerprint> ensemble,
                              const FusionConfig& cfg) {
  return FusionProblem(ensemble, cfg.objective).value(state);
}

inline FusionGradient objective_grad(const FusionState& state, std::span<const Fingerprint> ensemble,
                                     const FusionConfig& cfg) {
  FusionGradient g;
  const double v = FusionProblem(ensemble, cfg.objective).value_and_gradient(state, g);
  require(std::isfinite(v), Errc::divergence, "objective undefined: the synthesis space carries no information");
  return g;
}

/// Fingerprint of the synthesis space described by a state.
inline Fingerprint state_fingerprint(const FusionState& state, const std::vector<SampleId>& ids) {
  return fingerprint_gaussian(
      PosteriorSet(state.means, state.log_stddevs.array().exp().matrix(), ids, "fused"));
}

struct FusionResult {
  PosteriorSet space;
  FusionState state;
};

/// Plain gradient ascent from a given state. The trace holds the objective
/// before every step plus the final value.
inline FusionResult fuse(std::span<const Fingerprint> ensemble, const FusionConfig& cfg, FusionState state) {
  cfg.validate();
  const FusionProblem problem(ensemble, cfg.objective);
  require(state.size() == problem.size(), Errc::input, "initial state does not match the ensemble sample size");
  FusionGradient g;
  state.objective_trace.reserve(state.objective_trace.size() + cfg.steps + 1);
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    const double v = problem.value_and_gradient(state, g);
    if (!std::isfinite(v)) {
      fail(Errc::divergence, "objective undefined at step " + std::to_string(state.step) +
                                 ": the synthesis space carries no information");
    }
    state.objective_trace.push_back(v);
    state.means += cfg.learning_rate * g.means;
    state.log_stddevs += cfg.learning_rate * g.log_stddevs;
    ++state.step;
    if (!state.means.allFinite() || !state.log_stddevs.allFinite() ||
        !(state.log_stddevs.array().abs() < 700.0).all()) {
      fail(Errc::divergence, "non-finite parameters at step " + std::to_string(state.step) +
                                 "; lower the learning rate");
    }
  }
  state.objective_trace.push_back(problem.value(state));
  PosteriorSet space(state.means, state.log_stddevs.array().exp().matrix(), problem.sample_ids(), "fused");
  return {std::move(space), std::move(state)};
}

inline FusionResult fuse(std::span<const Fingerprint> ensemble, const FusionConfig& cfg) {
  require(!ensemble.empty(), Errc::input, "fusion needs at least one ensemble member");
  return fuse(ensemble, cfg, initial_state(ensemble.front().size(), cfg));
}

/// Mean of the off-diagonal entries; near zero for a scattered space.
inline double mean_off_diagonal(const Fingerprint& f) {
  const double n = static_cast<double>(f.size());
  return (f.values().sum() - n) / (n * (n - 1.0));
}

}  // namespace infocomp
