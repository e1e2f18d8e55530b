#pragma once

// Generalized NMI and VI. Self-entropies of the classic forms are replaced by
// the two-draw self-information I(U;U'), and every mutual information term is
// rewritten as information about the datum:
//   I(U;V)  = I(X;U) + I(X;V) - I(X;U,V)
//   I(U;U') = 2 I(X;U) - I(X;U,U')
// For hard clusterings the results coincide with the contingency-table forms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "infocomp/estimators.hpp"

namespace infocomp {

enum class Measure { nmi, vi, cka_bc, mi };

constexpr std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::nmi: return "nmi";
    case Measure::vi: return "vi";
    case Measure::cka_bc: return "cka_bc";
    case Measure::mi: return "mi";
  }
  return "unknown";
}

/// NMI below this many bits of self-information is undefined.
inline constexpr double kMinSelfInfoBits = 1e-12;

/// NMI/CKA values are unitless; VI and MI are in bits. An undefined value
/// (uninformative input) carries NaN and an explanation instead of throwing.
struct SimilarityValue {
  double value = 0.0;
  double std_err = 0.0;
  Measure measure = Measure::nmi;
  Estimator estimator = Estimator::kt_bound;
  bool defined = true;
  std::string note;

  /// NMI may exceed 1 slightly under MC noise; this caps it to [0, 1].
  double clamped() const { return measure == Measure::nmi ? std::clamp(value, 0.0, 1.0) : value; }

  static SimilarityValue undefined(Measure m, Estimator e, std::string why) {
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), m, e, false,
            std::move(why)};
  }
};

/// The five information terms behind NMI and VI, in bits.
struct InfoTerms {
  InfoEstimate u, v, uv, uu, vv;

  double mutual() const { return u.bits + v.bits - uv.bits; }
  double self_u() const { return 2.0 * u.bits - uu.bits; }
  double self_v() const { return 2.0 * v.bits - vv.bits; }
};

namespace detail {

inline SimilarityValue nmi_from_terms(const InfoTerms& t) {
  const auto est = t.u.estimator;
  const double su = t.self_u();
  const double sv = t.self_v();
  if (!(su >= kMinSelfInfoBits) || !(sv >= kMinSelfInfoBits)) {
    return SimilarityValue::undefined(Measure::nmi, est, "self-information below 1e-12 bits; NMI undefined");
  }
  const double num = t.mutual();
  const double den = std::sqrt(su * sv);
  SimilarityValue out{num / den, 0.0, Measure::nmi, est, true, {}};
  if (est == Estimator::monte_carlo) {
    // First-order delta method, the five terms treated as independent.
    const double g_u = 1.0 / den - num / (su * den);
    const double g_v = 1.0 / den - num / (sv * den);
    const double g_uv = -1.0 / den;
    const double g_uu = num / (2.0 * su * den);
    const double g_vv = num / (2.0 * sv * den);
    out.std_err = std::sqrt(std::pow(g_u * t.u.std_err, 2) + std::pow(g_v * t.v.std_err, 2) +
                            std::pow(g_uv * t.uv.std_err, 2) + std::pow(g_uu * t.uu.std_err, 2) +
                            std::pow(g_vv * t.vv.std_err, 2));
  }
  return out;
}

inline SimilarityValue vi_from_terms(const InfoTerms& t, ViErrorMode mode = ViErrorMode::sum_of_squares) {
  SimilarityValue out{2.0 * t.uv.bits - (t.uu.bits + t.vv.bits), 0.0, Measure::vi, t.u.estimator, true, {}};
  if (t.u.estimator == Estimator::monte_carlo) out.std_err = propagate_vi_error(t.uv.std_err, t.uu.std_err, t.vv.std_err, mode);
  return out;
}

inline SimilarityValue mi_from_terms(const InfoTerms& t) {
  SimilarityValue out{t.mutual(), 0.0, Measure::mi, t.u.estimator, true, {}};
  if (t.u.estimator == Estimator::monte_carlo) {
    out.std_err = std::sqrt(std::pow(t.u.std_err, 2) + std::pow(t.v.std_err, 2) + std::pow(t.uv.std_err, 2));
  }
  return out;
}

inline double entropy_bits_of_counts(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0.0) h -= (c / total) * std::log2(c / total);
  return h;
}

}  // namespace detail

/// KT-bound information terms of two aligned fingerprints.
inline InfoTerms kt_terms(const Fingerprint& f_u, const Fingerprint& f_v) {
  detail::require_aligned(f_u.sample_ids(), f_v.sample_ids());
  const auto& a = f_u.values();
  const auto& b = f_v.values();
  auto est = [&](double nats) { return InfoEstimate{nats / kLn2, 0.0, Estimator::kt_bound, f_u.size()}; };
  return {est(detail::kt_nats(a)), est(detail::kt_nats(b)), est(detail::kt_joint_nats(a, b)),
          est(detail::kt_joint_nats(a, a)), est(detail::kt_joint_nats(b, b))};
}

inline SimilarityValue nmi(const Fingerprint& f_u, const Fingerprint& f_v) {
  return detail::nmi_from_terms(kt_terms(f_u, f_v));
}

inline SimilarityValue vi(const Fingerprint& f_u, const Fingerprint& f_v) {
  return detail::vi_from_terms(kt_terms(f_u, f_v));
}

/// I(U;V) in bits.
inline SimilarityValue mutual_info(const Fingerprint& f_u, const Fingerprint& f_v) {
  return detail::mi_from_terms(kt_terms(f_u, f_v));
}

/// Monte Carlo information terms; each term gets its own seed derived from cfg.seed.
inline InfoTerms mc_terms(const PosteriorSet& u, const PosteriorSet& v, const McConfig& cfg) {
  detail::require_aligned(u.sample_ids(), v.sample_ids());
  std::seed_seq seq{cfg.seed};
  std::vector<std::uint64_t> seeds(5);
  seq.generate(seeds.begin(), seeds.end());
  auto with_seed = [&](std::size_t k) {
    McConfig c = cfg;
    c.seed = seeds[k];
    return c;
  };
  const std::vector<PosteriorSet> uv{u, v}, uu{u, u}, vv{v, v};
  return {info_mc(u, with_seed(0)), info_mc(v, with_seed(1)), info_mc_joint(uv, with_seed(2)),
          info_mc_joint(uu, with_seed(3)), info_mc_joint(vv, with_seed(4))};
}

inline SimilarityValue nmi_mc(const PosteriorSet& u, const PosteriorSet& v, const McConfig& cfg) {
  return detail::nmi_from_terms(mc_terms(u, v, cfg));
}

inline SimilarityValue vi_mc(const PosteriorSet& u, const PosteriorSet& v, const McConfig& cfg,
                             ViErrorMode mode = ViErrorMode::sum_of_squares) {
  return detail::vi_from_terms(mc_terms(u, v, cfg), mode);
}

inline InfoTerms exact_terms(const DiscreteSoftClustering& u, const DiscreteSoftClustering& v,
                             std::size_t cell_cap = kDefaultJointCellCap) {
  using Span = std::span<const DiscreteSoftClustering>;
  const std::vector<DiscreteSoftClustering> uv{u, v}, uu{u, u}, vv{v, v};
  return {info_exact_discrete(Span(&u, 1), cell_cap), info_exact_discrete(Span(&v, 1), cell_cap),
          info_exact_discrete(Span(uv), cell_cap), info_exact_discrete(Span(uu), cell_cap),
          info_exact_discrete(Span(vv), cell_cap)};
}

inline SimilarityValue nmi_exact(const DiscreteSoftClustering& u, const DiscreteSoftClustering& v) {
  return detail::nmi_from_terms(exact_terms(u, v));
}

inline SimilarityValue vi_exact(const DiscreteSoftClustering& u, const DiscreteSoftClustering& v) {
  return detail::vi_from_terms(exact_terms(u, v));
}

/// Contingency-table entropies of two labelings (bits).
struct ContingencyEntropies {
  double h_a = 0.0, h_b = 0.0, h_ab = 0.0;
};

inline ContingencyEntropies contingency_entropies(const HardClustering& a, const HardClustering& b) {
  require(a.size() == b.size(), Errc::input, "labelings differ in length");
  std::vector<double> ca(static_cast<std::size_t>(a.clusters()), 0.0);
  std::vector<double> cb(static_cast<std::size_t>(b.clusters()), 0.0);
  std::map<std::pair<int, int>, double> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[static_cast<std::size_t>(a.labels()[i])] += 1.0;
    cb[static_cast<std::size_t>(b.labels()[i])] += 1.0;
    cab[{a.labels()[i], b.labels()[i]}] += 1.0;
  }
  std::vector<double> joint;
  joint.reserve(cab.size());
  for (const auto& [_, c] : cab) joint.push_back(c);
  const auto n = static_cast<double>(a.size());
  return {detail::entropy_bits_of_counts(ca, n), detail::entropy_bits_of_counts(cb, n),
          detail::entropy_bits_of_counts(joint, n)};
}

/// Classic NMI: I(A;B) / sqrt(H(A) H(B)).
inline SimilarityValue nmi_hard(const HardClustering& a, const HardClustering& b) {
  const auto e = contingency_entropies(a, b);
  if (e.h_a < kMinSelfInfoBits || e.h_b < kMinSelfInfoBits) {
    return SimilarityValue::undefined(Measure::nmi, Estimator::exact_discrete, "a labeling has zero entropy");
  }
  return {(e.h_a + e.h_b - e.h_ab) / std::sqrt(e.h_a * e.h_b), 0.0, Measure::nmi, Estimator::exact_discrete, true, {}};
}

/// Classic VI: 2 H(A,B) - H(A) - H(B), in bits.
inline SimilarityValue vi_hard(const HardClustering& a, const HardClustering& b) {
  const auto e = contingency_entropies(a, b);
  return {2.0 * e.h_ab - (e.h_a + e.h_b), 0.0, Measure::vi, Estimator::exact_discrete, true, {}};
}

namespace detail {

// Tr(K H L H) with H the centering matrix, via the double-centered K.
inline Matrix double_center(const Matrix& k) {
  const Vector col_mean = k.colwise().mean().transpose();
  const Vector row_mean = k.rowwise().mean();
  const double grand = k.mean();
  Matrix c = k;
  c.colwise() -= row_mean;
  c.rowwise() -= col_mean.transpose();
  c.array() += grand;
  return c;
}

}  // namespace detail

/// CKA with Bhattacharyya matrices in place of the dot-product kernels:
/// HSIC(B1, B2) = Tr(B1 H B2 H) / (n-1)^2, normalized by the self-HSICs.
inline SimilarityValue cka_bc(const Fingerprint& f_u, const Fingerprint& f_v) {
  detail::require_aligned(f_u.sample_ids(), f_v.sample_ids());
  const Matrix cu = detail::double_center(f_u.values());
  const Matrix cv = detail::double_center(f_v.values());
  const double scale = std::pow(static_cast<double>(f_u.size()) - 1.0, 2);
  const double h_uv = cu.cwiseProduct(cv).sum() / scale;
  const double h_uu = cu.squaredNorm() / scale;
  const double h_vv = cv.squaredNorm() / scale;
  constexpr double kTiny = 1e-14;
  if (h_uu <= kTiny || h_vv <= kTiny) {
    return SimilarityValue::undefined(Measure::cka_bc, Estimator::kt_bound, "constant fingerprint has zero self-HSIC");
  }
  const double v = std::clamp(h_uv / std::sqrt(h_uu * h_vv), 0.0, 1.0);
  return {v, 0.0, Measure::cka_bc, Estimator::kt_bound, true, {}};
}

inline constexpr double kNmiDistanceFloor = 1e-4;

/// -ln max(NMI, 1e-4).
inline double nmi_to_distance(double nmi_value) { return -std::log(std::max(nmi_value, kNmiDistanceFloor)); }

/// exp(-VI) with VI converted to nats.
inline double vi_to_similarity(double vi_bits) { return std::exp(-vi_bits * kLn2); }

inline double to_distance(const SimilarityValue& s) {
  require(s.measure == Measure::nmi, Errc::input, "to_distance expects an NMI value");
  if (!s.defined) return std::numeric_limits<double>::quiet_NaN();
  return nmi_to_distance(s.value);
}

inline double to_similarity(const SimilarityValue& s) {
  require(s.measure == Measure::vi, Errc::input, "to_similarity expects a VI value");
  if (!s.defined) return std::numeric_limits<double>::quiet_NaN();
  return vi_to_similarity(s.value);
}

}  // namespace infocomp
