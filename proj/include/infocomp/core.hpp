#pragma once

// Domain types and fingerprint algebra.
//
// A representation space is described by the diagonal-Gaussian posteriors it
// assigns to a fixed sample of data. Its fingerprint is the matrix of pairwise
// Bhattacharyya coefficients between those posteriors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "infocomp/error.hpp"
#include "infocomp/parallel.hpp"

namespace infocomp {

using SampleId = std::string;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// "0", "1", ..., "n-1"
inline std::vector<SampleId> index_ids(std::size_t n) {
  std::vector<SampleId> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

namespace detail {

inline void require_unique(const std::vector<SampleId>& ids) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids) {
    require(seen.insert(id).second, Errc::duplicate_id, "duplicate sample id '" + id + "'");
  }
}

inline void require_aligned(const std::vector<SampleId>& a, const std::vector<SampleId>& b) {
  require(a.size() == b.size(), Errc::alignment,
          "sample count mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) {
      fail(Errc::alignment, "sample id mismatch at position " + std::to_string(i) + ": '" + a[i] +
                                "' vs '" + b[i] + "'");
    }
  }
}

// Log-BC of two 1-D Gaussians. The scale term is capped at 0 so rounding can
// never push a coefficient above one.
inline double log_bc_1d(double mean_a, double sd_a, double mean_b, double sd_b) {
  const double var_sum = sd_a * sd_a + sd_b * sd_b;
  const double diff = mean_a - mean_b;
  const double scale = std::min(0.0, 0.5 * std::log(2.0 * sd_a * sd_b / var_sum));
  return scale - diff * diff / (4.0 * var_sum);
}

}  // namespace detail

struct GaussianPosterior {
  Vector mean;
  Vector stddev;

  GaussianPosterior() = default;
  GaussianPosterior(Vector m, Vector s) : mean(std::move(m)), stddev(std::move(s)) { validate(); }

  Eigen::Index dim() const { return mean.size(); }

  void validate() const {
    require(mean.size() >= 1, Errc::input, "posterior must have dimension >= 1");
    require(mean.size() == stddev.size(), Errc::input, "mean and stddev lengths differ");
    for (Eigen::Index k = 0; k < stddev.size(); ++k) {
      require(std::isfinite(mean[k]), Errc::non_finite, "non-finite posterior mean");
      require(std::isfinite(stddev[k]), Errc::non_finite, "non-finite posterior stddev");
      require(stddev[k] > 0.0, Errc::nonpositive_stddev, "posterior stddev must be positive");
    }
  }
};

/// N diagonal-Gaussian posteriors sharing one latent dimension, stored as
/// row-major N x d blocks of means and standard deviations.
class PosteriorSet {
 public:
  PosteriorSet() = default;

  PosteriorSet(RowMatrix means, RowMatrix stddevs, std::vector<SampleId> sample_ids, std::string space_id = {})
      : means_(std::move(means)),
        stddevs_(std::move(stddevs)),
        sample_ids_(std::move(sample_ids)),
        space_id_(std::move(space_id)) {
    validate();
  }

  PosteriorSet(RowMatrix means, RowMatrix stddevs, std::string space_id = {})
      : PosteriorSet(means, stddevs, index_ids(static_cast<std::size_t>(means.rows())), std::move(space_id)) {}

  static PosteriorSet from_posteriors(std::span<const GaussianPosterior> posteriors,
                                      std::vector<SampleId> sample_ids, std::string space_id = {}) {
    require(!posteriors.empty(), Errc::input, "empty posterior list");
    const auto d = posteriors.front().dim();
    RowMatrix means(static_cast<Eigen::Index>(posteriors.size()), d);
    RowMatrix stddevs(means.rows(), d);
    for (std::size_t i = 0; i < posteriors.size(); ++i) {
      require(posteriors[i].dim() == d, Errc::input, "posteriors differ in dimension");
      means.row(static_cast<Eigen::Index>(i)) = posteriors[i].mean.transpose();
      stddevs.row(static_cast<Eigen::Index>(i)) = posteriors[i].stddev.transpose();
    }
    return PosteriorSet(std::move(means), std::move(stddevs), std::move(sample_ids), std::move(space_id));
  }

  std::size_t size() const { return static_cast<std::size_t>(means_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(means_.cols()); }
  const RowMatrix& means() const { return means_; }
  const RowMatrix& stddevs() const { return stddevs_; }
  const std::vector<SampleId>& sample_ids() const { return sample_ids_; }
  const std::string& space_id() const { return space_id_; }
  void set_space_id(std::string id) { space_id_ = std::move(id); }

  GaussianPosterior posterior(std::size_t i) const {
    const auto r = static_cast<Eigen::Index>(i);
    return GaussianPosterior(means_.row(r).transpose(), stddevs_.row(r).transpose());
  }

 private:
  void validate() const {
    require(means_.rows() >= 2, Errc::input, "a posterior set needs at least 2 samples");
    require(means_.cols() >= 1, Errc::input, "latent dimension must be >= 1");
    require(means_.rows() == stddevs_.rows() && means_.cols() == stddevs_.cols(), Errc::input,
            "means and stddevs shapes differ");
    require(sample_ids_.size() == size(), Errc::input, "sample id count does not match posterior count");
    for (Eigen::Index i = 0; i < means_.rows(); ++i) {
      for (Eigen::Index k = 0; k < means_.cols(); ++k) {
        const auto where = " at sample " + std::to_string(i) + ", dim " + std::to_string(k);
        require(std::isfinite(means_(i, k)), Errc::non_finite, "non-finite mean" + where);
        require(std::isfinite(stddevs_(i, k)), Errc::non_finite, "non-finite stddev" + where);
        require(stddevs_(i, k) > 0.0, Errc::nonpositive_stddev, "nonpositive stddev" + where);
      }
    }
    detail::require_unique(sample_ids_);
  }

  RowMatrix means_;
  RowMatrix stddevs_;
  std::vector<SampleId> sample_ids_;
  std::string space_id_;
};

/// Assignment of every datum to exactly one of K clusters.
class HardClustering {
 public:
  HardClustering() = default;

  explicit HardClustering(std::vector<int> labels, int k = -1, std::vector<SampleId> sample_ids = {})
      : labels_(std::move(labels)), sample_ids_(std::move(sample_ids)) {
    int max_label = -1;
    for (int l : labels_) {
      require(l >= 0, Errc::input, "cluster labels must be nonnegative");
      max_label = std::max(max_label, l);
    }
    k_ = k < 0 ? max_label + 1 : k;
    require(max_label < k_, Errc::input, "cluster label out of range [0, K)");
    require(!labels_.empty(), Errc::input, "empty clustering");
    if (sample_ids_.empty()) sample_ids_ = index_ids(labels_.size());
    require(sample_ids_.size() == labels_.size(), Errc::input, "sample id count does not match label count");
    detail::require_unique(sample_ids_);
  }

  std::size_t size() const { return labels_.size(); }
  int clusters() const { return k_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<SampleId>& sample_ids() const { return sample_ids_; }

 private:
  std::vector<int> labels_;
  int k_ = 0;
  std::vector<SampleId> sample_ids_;
};

/// Fuzzy clustering: each row is a membership distribution over K clusters.
class DiscreteSoftClustering {
 public:
  DiscreteSoftClustering() = default;

  explicit DiscreteSoftClustering(RowMatrix memberships, std::vector<SampleId> sample_ids = {})
      : memberships_(std::move(memberships)), sample_ids_(std::move(sample_ids)) {
    require(memberships_.rows() >= 1 && memberships_.cols() >= 1, Errc::input, "empty membership matrix");
    for (Eigen::Index i = 0; i < memberships_.rows(); ++i) {
      for (Eigen::Index k = 0; k < memberships_.cols(); ++k) {
        require(std::isfinite(memberships_(i, k)) && memberships_(i, k) >= 0.0, Errc::input,
                "memberships must be finite and nonnegative");
      }
      const double s = memberships_.row(i).sum();
      require(std::abs(s - 1.0) <= 1e-12, Errc::input,
              "membership row " + std::to_string(i) + " sums to " + std::to_string(s) + ", expected 1");
    }
    if (sample_ids_.empty()) sample_ids_ = index_ids(static_cast<std::size_t>(memberships_.rows()));
    require(sample_ids_.size() == size(), Errc::input, "sample id count does not match membership rows");
    detail::require_unique(sample_ids_);
  }

  static DiscreteSoftClustering one_hot(const HardClustering& h) {
    RowMatrix m = RowMatrix::Zero(static_cast<Eigen::Index>(h.size()), h.clusters());
    for (std::size_t i = 0; i < h.size(); ++i) m(static_cast<Eigen::Index>(i), h.labels()[i]) = 1.0;
    return DiscreteSoftClustering(std::move(m), h.sample_ids());
  }

  std::size_t size() const { return static_cast<std::size_t>(memberships_.rows()); }
  int clusters() const { return static_cast<int>(memberships_.cols()); }
  const RowMatrix& memberships() const { return memberships_; }
  const std::vector<SampleId>& sample_ids() const { return sample_ids_; }

 private:
  RowMatrix memberships_;
  std::vector<SampleId> sample_ids_;
};

/// Symmetric N x N matrix of pairwise Bhattacharyya coefficients over a shared
/// data sample. Invariants (checked on construction): symmetric, entries in
/// [0, 1], unit diagonal.
class Fingerprint {
 public:
  Fingerprint() = default;

  Fingerprint(Matrix values, std::vector<SampleId> sample_ids, std::string space_id = {})
      : values_(std::move(values)), sample_ids_(std::move(sample_ids)), space_id_(std::move(space_id)) {
    validate();
  }

  explicit Fingerprint(Matrix values) : Fingerprint(values, index_ids(static_cast<std::size_t>(values.rows()))) {}

  std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
  const Matrix& values() const { return values_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const std::vector<SampleId>& sample_ids() const { return sample_ids_; }
  const std::string& space_id() const { return space_id_; }
  void set_space_id(std::string id) { space_id_ = std::move(id); }

  static Fingerprint identity(std::size_t n) { return Fingerprint(Matrix::Identity(n_(n), n_(n))); }
  static Fingerprint ones(std::size_t n) { return Fingerprint(Matrix::Ones(n_(n), n_(n))); }

 private:
  static Eigen::Index n_(std::size_t n) { return static_cast<Eigen::Index>(n); }

  void validate() const {
    require(values_.rows() == values_.cols(), Errc::input, "fingerprint must be square");
    require(values_.rows() >= 1, Errc::input, "empty fingerprint");
    require(sample_ids_.size() == size(), Errc::input, "sample id count does not match fingerprint size");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      require(values_(i, i) == 1.0, Errc::diagonal, "fingerprint diagonal must be exactly 1");
      for (Eigen::Index j = i + 1; j < values_.cols(); ++j) {
        const double v = values_(i, j);
        require(v == values_(j, i), Errc::asymmetric, "fingerprint must be symmetric");
        require(v >= 0.0 && v <= 1.0, Errc::input, "fingerprint entries must lie in [0, 1]");
      }
    }
    detail::require_unique(sample_ids_);
  }

  Matrix values_;
  std::vector<SampleId> sample_ids_;
  std::string space_id_;
};

/// Closed-form Bhattacharyya coefficient of two diagonal Gaussians, accumulated
/// in log space over dimensions and exponentiated once.
inline double log_bc_gaussian(const GaussianPosterior& p, const GaussianPosterior& q) {
  require(p.dim() == q.dim(), Errc::input,
          "dimension mismatch: " + std::to_string(p.dim()) + " vs " + std::to_string(q.dim()));
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p.dim(); ++k) {
    acc += detail::log_bc_1d(p.mean[k], p.stddev[k], q.mean[k], q.stddev[k]);
  }
  return acc;
}

inline double bc_gaussian(const GaussianPosterior& p, const GaussianPosterior& q) {
  return std::exp(log_bc_gaussian(p, q));
}

/// One fingerprint row: out[j] = BC(posterior_i, posterior_j).
inline void fingerprint_row(const PosteriorSet& space, std::size_t i, std::span<double> out) {
  const auto& m = space.means();
  const auto& s = space.stddevs();
  const auto r = static_cast<Eigen::Index>(i);
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    if (j == r) {
      out[static_cast<std::size_t>(j)] = 1.0;
      continue;
    }
    double acc = 0.0;
    for (Eigen::Index k = 0; k < m.cols(); ++k) acc += detail::log_bc_1d(m(r, k), s(r, k), m(j, k), s(j, k));
    out[static_cast<std::size_t>(j)] = std::exp(acc);
  }
}

inline Fingerprint fingerprint_gaussian(const PosteriorSet& space) {
  const auto n = static_cast<Eigen::Index>(space.size());
  const auto& m = space.means();
  const auto& s = space.stddevs();
  Matrix bc(n, n);
  // Upper triangle is computed row by row; the mirror keeps symmetry exact.
  parallel_for(0, space.size(), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    bc(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < m.cols(); ++k) acc += detail::log_bc_1d(m(i, k), s(i, k), m(j, k), s(j, k));
      bc(i, j) = std::exp(acc);
    }
  });
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) bc(j, i) = bc(i, j);
  return Fingerprint(std::move(bc), space.sample_ids(), space.space_id());
}

inline Fingerprint fingerprint_hard(const HardClustering& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto& l = labels.labels();
  Matrix bc(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) bc(i, j) = l[static_cast<std::size_t>(i)] == l[static_cast<std::size_t>(j)];
  return Fingerprint(std::move(bc), labels.sample_ids());
}

/// BC between discrete membership distributions: sum_k sqrt(m_ik * m_jk).
inline Fingerprint fingerprint_discrete_soft(const DiscreteSoftClustering& clust) {
  const RowMatrix root = clust.memberships().array().sqrt().matrix();
  const auto n = root.rows();
  Matrix bc(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    bc(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::min(1.0, root.row(i).dot(root.row(j)));
      bc(i, j) = v;
      bc(j, i) = v;
    }
  }
  return Fingerprint(std::move(bc), clust.sample_ids());
}

/// Fingerprint of the joint space (U, V): the elementwise product. Passing the
/// same fingerprint twice gives the two-draw self-joint (U, U').
inline Fingerprint fingerprint_product(const Fingerprint& a, const Fingerprint& b) {
  detail::require_aligned(a.sample_ids(), b.sample_ids());
  Matrix prod = a.values().cwiseProduct(b.values());
  std::string id = a.space_id().empty() && b.space_id().empty() ? std::string{} : a.space_id() + "*" + b.space_id();
  return Fingerprint(std::move(prod), a.sample_ids(), std::move(id));
}

inline PosteriorSet marginal_channel(const PosteriorSet& space, std::size_t dim) {
  require(dim < space.dim(), Errc::input,
          "channel " + std::to_string(dim) + " out of range for dimension " + std::to_string(space.dim()));
  const auto k = static_cast<Eigen::Index>(dim);
  RowMatrix means = space.means().col(k);
  RowMatrix stddevs = space.stddevs().col(k);
  return PosteriorSet(std::move(means), std::move(stddevs), space.sample_ids(),
                      space.space_id() + "#" + std::to_string(dim));
}

/// Concatenates the latent coordinates of aligned spaces. Since posteriors are
/// independent given the datum, this is the joint space; listing a space twice
/// gives two independent draws from it.
inline PosteriorSet concat_spaces(std::span<const PosteriorSet> spaces) {
  require(!spaces.empty(), Errc::input, "no spaces to concatenate");
  std::size_t d = 0;
  for (const auto& s : spaces) {
    detail::require_aligned(spaces.front().sample_ids(), s.sample_ids());
    d += s.dim();
  }
  const auto n = static_cast<Eigen::Index>(spaces.front().size());
  RowMatrix means(n, static_cast<Eigen::Index>(d));
  RowMatrix stddevs(n, static_cast<Eigen::Index>(d));
  Eigen::Index col = 0;
  std::string id;
  for (const auto& s : spaces) {
    const auto w = static_cast<Eigen::Index>(s.dim());
    means.middleCols(col, w) = s.means();
    stddevs.middleCols(col, w) = s.stddevs();
    col += w;
    id += (id.empty() ? "" : "+") + s.space_id();
  }
  return PosteriorSet(std::move(means), std::move(stddevs), spaces.front().sample_ids(), std::move(id));
}

}  // namespace infocomp
