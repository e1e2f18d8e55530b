#pragma once

// Ensemble channel similarity: treat every latent dimension of every model as
// a 1-D space, drop the uninformative ones, compare the rest pairwise and
// order them with OPTICS so that consistently learned channels form valleys.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "infocomp/kernel.hpp"
#include "infocomp/optics.hpp"
#include "infocomp/similarity.hpp"

namespace infocomp {

struct ChannelRef {
  std::string model_id;
  std::size_t dim = 0;

  std::string label() const { return model_id + ":" + std::to_string(dim); }
  friend bool operator==(const ChannelRef&, const ChannelRef&) = default;
};

/// One latent dimension of one model. The fingerprint is materialized only
/// on request; bulk operations stream its rows from the posterior parameters.
struct Channel {
  ChannelRef ref;
  PosteriorSet space;

  Fingerprint fingerprint() const { return fingerprint_gaussian(space); }
};

struct SimilarityMatrix {
  Matrix values;
  std::vector<ChannelRef> refs;
  Measure measure = Measure::nmi;
};

inline constexpr double kDefaultThresholdBits = 0.01;

inline std::vector<Channel> collect_channels(std::span<const PosteriorSet> ensemble) {
  std::vector<Channel> out;
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    const auto& model = ensemble[m];
    detail::require_aligned(ensemble.front().sample_ids(), model.sample_ids());
    const std::string id = model.space_id().empty() ? "model" + std::to_string(m) : model.space_id();
    for (std::size_t k = 0; k < model.dim(); ++k) out.push_back({{id, k}, marginal_channel(model, k)});
  }
  return out;
}

inline std::vector<FingerprintSource> sources_of(std::span<const Channel> channels) {
  std::vector<FingerprintSource> s;
  s.reserve(channels.size());
  for (const auto& c : channels) s.push_back(source_of(c.space));
  return s;
}

/// KT information (bits) of each channel.
inline std::vector<double> channel_information(std::span<const Channel> channels) {
  if (channels.empty()) return {};
  const auto src = sources_of(channels);
  const Vector bits = self_info_bits(src);
  return {bits.data(), bits.data() + bits.size()};
}

/// Keeps channels whose KT information is at least threshold_bits (inclusive),
/// preserving order.
inline std::vector<Channel> filter_informative(std::span<const Channel> channels, std::span<const double> info_bits,
                                               double threshold_bits = kDefaultThresholdBits) {
  require(threshold_bits >= 0.0, Errc::config, "threshold must be nonnegative");
  require(info_bits.size() == channels.size(), Errc::input, "one information value per channel expected");
  std::vector<Channel> kept;
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (info_bits[i] >= threshold_bits) kept.push_back(channels[i]);
  return kept;
}

inline std::vector<Channel> filter_informative(std::span<const Channel> channels,
                                               double threshold_bits = kDefaultThresholdBits) {
  const auto info = channel_information(channels);
  return filter_informative(channels, info, threshold_bits);
}

namespace detail {

inline double measure_from_table(Measure measure, double self_a, double self_b, double sj_a, double sj_b, double joint) {
  InfoTerms t;
  auto e = [](double b) { return InfoEstimate{b, 0.0, Estimator::kt_bound, 0}; };
  t.u = e(self_a);
  t.v = e(self_b);
  t.uu = e(sj_a);
  t.vv = e(sj_b);
  t.uv = e(joint);
  switch (measure) {
    case Measure::nmi: return nmi_from_terms(t).value;  // NaN when undefined
    case Measure::vi: return vi_from_terms(t).value;
    case Measure::mi: return mi_from_terms(t).value;
    case Measure::cka_bc: break;
  }
  fail(Errc::input, "measure not supported by the batched kernel");
}

inline SimilarityMatrix similarity_from_sources(std::span<const FingerprintSource> src, std::vector<ChannelRef> refs,
                                                Measure measure) {
  require(src.size() >= 2, Errc::input, "pairwise similarity needs at least 2 channels");
  const auto t = joint_info_table(src);
  const auto m = static_cast<Eigen::Index>(src.size());
  SimilarityMatrix out{Matrix(m, m), std::move(refs), measure};
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v =
          measure_from_table(measure, t.self[a], t.self[b], t.self_joint[a], t.self_joint[b], t.joint(a, b));
      out.values(a, b) = v;
      out.values(b, a) = v;
    }
  }
  return out;
}

}  // namespace detail

inline SimilarityMatrix pairwise_similarity(std::span<const Channel> channels, Measure measure = Measure::nmi) {
  std::vector<ChannelRef> refs;
  for (const auto& c : channels) refs.push_back(c.ref);
  const auto src = sources_of(channels);
  return detail::similarity_from_sources(src, std::move(refs), measure);
}

/// Same table for already materialized fingerprints (refs named by index when
/// not given).
inline SimilarityMatrix pairwise_similarity(std::span<const Fingerprint> fingerprints, Measure measure = Measure::nmi,
                                            std::vector<ChannelRef> refs = {}) {
  for (const auto& f : fingerprints) detail::require_aligned(fingerprints.front().sample_ids(), f.sample_ids());
  if (refs.empty())
    for (std::size_t i = 0; i < fingerprints.size(); ++i)
      refs.push_back({fingerprints[i].space_id().empty() ? "fp" + std::to_string(i) : fingerprints[i].space_id(), 0});
  require(refs.size() == fingerprints.size(), Errc::input, "one ref per fingerprint expected");
  std::vector<FingerprintSource> src;
  for (const auto& f : fingerprints) src.push_back(source_of(f));
  return detail::similarity_from_sources(src, std::move(refs), measure);
}

/// NMI -> -ln max(NMI, 1e-4); VI (bits) is already a distance. Zero diagonal.
inline Matrix to_distance_matrix(const SimilarityMatrix& s) {
  Matrix d(s.values.rows(), s.values.cols());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      const double v = s.values(i, j);
      switch (s.measure) {
        case Measure::nmi: d(i, j) = std::max(0.0, nmi_to_distance(std::isnan(v) ? 0.0 : v)); break;
        case Measure::vi: d(i, j) = std::max(0.0, v); break;
        default: fail(Errc::input, "distance transform defined for nmi and vi only");
      }
    }
    d(i, i) = 0.0;
  }
  return d;
}

/// Member with the highest mean similarity to the other members (lowest index on ties).
inline std::size_t representative(std::span<const std::size_t> group, const SimilarityMatrix& sim) {
  require(!group.empty(), Errc::input, "empty group");
  if (group.size() == 1) return group.front();
  std::size_t best = group.front();
  double best_score = -kInf;
  for (auto a : group) {
    double s = 0.0;
    for (auto b : group)
      if (a != b) s += sim.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    s /= static_cast<double>(group.size() - 1);
    if (s > best_score || (s == best_score && a < best)) {
      best_score = s;
      best = a;
    }
  }
  return best;
}

/// Per-channel similarity against a ground-truth factor treated as a hard
/// clustering.
inline std::vector<double> factor_info_column(std::span<const Channel> channels, const HardClustering& factor,
                                              Measure measure = Measure::nmi) {
  if (channels.empty()) return {};
  for (const auto& c : channels) detail::require_aligned(c.space.sample_ids(), factor.sample_ids());
  const auto src = sources_of(channels);
  const std::vector<FingerprintSource> fsrc{source_of(fingerprint_hard(factor))};
  const auto t = cross_info_table(src, fsrc);
  std::vector<double> out(channels.size());
  for (std::size_t a = 0; a < channels.size(); ++a) {
    const auto i = static_cast<Eigen::Index>(a);
    out[a] = detail::measure_from_table(measure, t.self_a[i], t.self_b[0], t.self_joint_a[i], t.self_joint_b[0],
                                        t.joint(i, 0));
  }
  return out;
}

/// Everything the channel pipeline produces.
struct ChannelReport {
  std::vector<ChannelRef> all_refs;
  std::vector<double> info_bits;           // per collected channel
  std::vector<std::size_t> kept;           // indices into all_refs
  SimilarityMatrix similarity;             // over kept channels
  OpticsResult optics;                     // indices into kept
  std::vector<std::size_t> representatives;  // one per group, indices into kept
};

struct ChannelPipelineConfig {
  double threshold_bits = kDefaultThresholdBits;
  std::size_t min_samples = 20;
  double xi = 0.05;
  Measure measure = Measure::nmi;
};

inline ChannelReport run_channel_pipeline(std::span<const PosteriorSet> ensemble, const ChannelPipelineConfig& cfg = {}) {
  ChannelReport rep;
  const auto channels = collect_channels(ensemble);
  for (const auto& c : channels) rep.all_refs.push_back(c.ref);
  rep.info_bits = channel_information(channels);
  std::vector<Channel> kept;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (rep.info_bits[i] >= cfg.threshold_bits) {
      rep.kept.push_back(i);
      kept.push_back(channels[i]);
    }
  }
  rep.similarity.measure = cfg.measure;
  if (kept.size() < 2) return rep;
  rep.similarity = pairwise_similarity(kept, cfg.measure);
  rep.optics = optics(to_distance_matrix(rep.similarity), cfg.min_samples, cfg.xi);
  for (const auto& g : rep.optics.groups) rep.representatives.push_back(representative(g.members, rep.similarity));
  return rep;
}

}  // namespace infocomp
