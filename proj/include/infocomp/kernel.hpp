#pragma once

// Batched KT terms for many spaces over one data sample.
//
// For spaces a, b with fingerprints A, B the joint bound needs the row sums
// sum_j A_ij B_ij. Stacking row i of every fingerprint into R_i (M x N) turns
// all of them into one Gram matrix R_i R_i^T, so the M fingerprints never have
// to be resident at once: rows are produced on demand from the posterior
// parameters (or copied from materialized fingerprints).
//
// Rows are processed in fixed blocks whose partial sums are combined in block
// order, so the result does not depend on the thread count.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "infocomp/core.hpp"
#include "infocomp/estimators.hpp"

namespace infocomp {

/// Produces rows of a fingerprint on demand.
struct FingerprintSource {
  std::size_t size = 0;
  std::function<void(std::size_t row, std::span<double> out)> row;
};

inline FingerprintSource source_of(std::shared_ptr<const Fingerprint> f) {
  const auto n = f->size();
  return {n, [f = std::move(f)](std::size_t i, std::span<double> out) {
            const auto& v = f->values();
            // symmetric: column i equals row i and is contiguous
            std::copy_n(v.col(static_cast<Eigen::Index>(i)).data(), out.size(), out.begin());
          }};
}

inline FingerprintSource source_of(const Fingerprint& f) { return source_of(std::make_shared<const Fingerprint>(f)); }

/// Rows computed from the posterior parameters.
inline FingerprintSource source_of(const PosteriorSet& space) {
  struct Params {
    std::vector<Eigen::ArrayXd> mean, var;
    std::vector<Eigen::ArrayXd> log_sd;
  };
  auto p = std::make_shared<Params>();
  for (std::size_t k = 0; k < space.dim(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    Eigen::ArrayXd m = space.means().col(c);
    Eigen::ArrayXd s = space.stddevs().col(c);
    p->mean.push_back(m);
    p->var.push_back(s.square());
    p->log_sd.push_back(s.log());
  }
  const auto n = space.size();
  return {n, [p = std::move(p), n](std::size_t i, std::span<double> out) {
            const auto r = static_cast<Eigen::Index>(i);
            Eigen::Map<Eigen::ArrayXd> row(out.data(), static_cast<Eigen::Index>(n));
            row.setZero();
            for (std::size_t k = 0; k < p->mean.size(); ++k) {
              const auto& m = p->mean[k];
              const auto& v = p->var[k];
              const auto& ls = p->log_sd[k];
              const Eigen::ArrayXd vsum = v + v[r];
              // 0.5 ln(2 s_i s_j / (s_i^2 + s_j^2)), capped at 0
              const Eigen::ArrayXd scale =
                  (0.5 * (std::log(2.0) + ls + ls[r] - vsum.log())).min(0.0);
              row += scale - (m - m[r]).square() / (4.0 * vsum);
            }
            row = row.exp();
            row[r] = 1.0;
          }};
}

/// KT terms (bits) for every space and every pair of spaces.
struct JointInfoTable {
  Vector self;        // I(X; U_a)
  Vector self_joint;  // I(X; U_a, U_a')
  Matrix joint;       // I(X; U_a, U_b); the diagonal equals self_joint
};

/// KT terms across two lists: self terms for each list and the cross table.
struct CrossInfoTable {
  Vector self_a, self_joint_a;
  Vector self_b, self_joint_b;
  Matrix joint;  // rows index list a, columns list b
};

namespace detail {

inline constexpr std::size_t kKernelBlockRows = 32;

inline std::size_t common_size(std::span<const FingerprintSource> s) {
  require(!s.empty(), Errc::input, "no fingerprint sources");
  for (const auto& x : s) require(x.size == s.front().size, Errc::alignment, "fingerprint sources differ in sample size");
  return s.front().size;
}

inline void fill_rows(std::span<const FingerprintSource> sources, std::size_t i, Matrix& rows) {
  // rows is N x M (column per source) so every source row is contiguous
  for (std::size_t a = 0; a < sources.size(); ++a) {
    sources[a].row(i, std::span<double>(rows.col(static_cast<Eigen::Index>(a)).data(), sources[a].size));
  }
}

}  // namespace detail

inline JointInfoTable joint_info_table(std::span<const FingerprintSource> sources) {
  const auto n = detail::common_size(sources);
  const auto m = static_cast<Eigen::Index>(sources.size());
  const std::size_t blocks = (n + detail::kKernelBlockRows - 1) / detail::kKernelBlockRows;

  struct Partial {
    Matrix log_gram;  // lower triangle used
    Vector log_rows;
  };
  std::vector<Partial> partial(blocks);

  parallel_for(0, blocks, [&](std::size_t b) {
    Partial p{Matrix::Zero(m, m), Vector::Zero(m)};
    Matrix rows(static_cast<Eigen::Index>(n), m);
    Matrix gram(m, m);
    const std::size_t end = std::min(n, (b + 1) * detail::kKernelBlockRows);
    for (std::size_t i = b * detail::kKernelBlockRows; i < end; ++i) {
      detail::fill_rows(sources, i, rows);
      p.log_rows.array() += rows.colwise().sum().transpose().array().log();
      gram.setZero();
      gram.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
      p.log_gram.triangularView<Eigen::Lower>() += gram.array().log().matrix();
    }
    partial[b] = std::move(p);
  });

  Matrix log_gram = Matrix::Zero(m, m);
  Vector log_rows = Vector::Zero(m);
  for (const auto& p : partial) {
    log_gram.triangularView<Eigen::Lower>() += p.log_gram;
    log_rows += p.log_rows;
  }

  const double nd = static_cast<double>(n);
  const double log_n = std::log(nd);
  // -(1/N) sum_i ln(r_i / N) = ln N - (1/N) sum_i ln r_i
  auto to_bits = [&](double sum_log) { return (log_n - sum_log / nd) / kLn2; };

  JointInfoTable t;
  t.self = log_rows.unaryExpr(to_bits);
  t.joint.resize(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = to_bits(log_gram(a, b));
      t.joint(a, b) = v;
      t.joint(b, a) = v;
    }
  }
  t.self_joint = t.joint.diagonal();
  return t;
}

inline CrossInfoTable cross_info_table(std::span<const FingerprintSource> list_a,
                                       std::span<const FingerprintSource> list_b) {
  const auto n = detail::common_size(list_a);
  require(detail::common_size(list_b) == n, Errc::alignment, "fingerprint lists differ in sample size");
  const auto ma = static_cast<Eigen::Index>(list_a.size());
  const auto mb = static_cast<Eigen::Index>(list_b.size());
  const std::size_t blocks = (n + detail::kKernelBlockRows - 1) / detail::kKernelBlockRows;

  struct Partial {
    Matrix log_cross;
    Vector rows_a, sq_a, rows_b, sq_b;
  };
  std::vector<Partial> partial(blocks);

  parallel_for(0, blocks, [&](std::size_t blk) {
    Partial p{Matrix::Zero(ma, mb), Vector::Zero(ma), Vector::Zero(ma), Vector::Zero(mb), Vector::Zero(mb)};
    Matrix ra(static_cast<Eigen::Index>(n), ma);
    Matrix rb(static_cast<Eigen::Index>(n), mb);
    const std::size_t end = std::min(n, (blk + 1) * detail::kKernelBlockRows);
    for (std::size_t i = blk * detail::kKernelBlockRows; i < end; ++i) {
      detail::fill_rows(list_a, i, ra);
      detail::fill_rows(list_b, i, rb);
      p.rows_a.array() += ra.colwise().sum().transpose().array().log();
      p.sq_a.array() += ra.colwise().squaredNorm().transpose().array().log();
      p.rows_b.array() += rb.colwise().sum().transpose().array().log();
      p.sq_b.array() += rb.colwise().squaredNorm().transpose().array().log();
      p.log_cross.array() += (ra.transpose() * rb).array().log();
    }
    partial[blk] = std::move(p);
  });

  Partial total{Matrix::Zero(ma, mb), Vector::Zero(ma), Vector::Zero(ma), Vector::Zero(mb), Vector::Zero(mb)};
  for (const auto& p : partial) {
    total.log_cross += p.log_cross;
    total.rows_a += p.rows_a;
    total.sq_a += p.sq_a;
    total.rows_b += p.rows_b;
    total.sq_b += p.sq_b;
  }
  const double nd = static_cast<double>(n);
  const double log_n = std::log(nd);
  auto to_bits = [&](double sum_log) { return (log_n - sum_log / nd) / kLn2; };
  return {total.rows_a.unaryExpr(to_bits), total.sq_a.unaryExpr(to_bits), total.rows_b.unaryExpr(to_bits),
          total.sq_b.unaryExpr(to_bits), total.log_cross.unaryExpr(to_bits)};
}

/// KT information of every source (bits), without the pairwise table.
inline Vector self_info_bits(std::span<const FingerprintSource> sources) {
  const auto n = detail::common_size(sources);
  const auto m = static_cast<Eigen::Index>(sources.size());
  const std::size_t blocks = (n + detail::kKernelBlockRows - 1) / detail::kKernelBlockRows;
  std::vector<Vector> partial(blocks);
  parallel_for(0, blocks, [&](std::size_t b) {
    Vector acc = Vector::Zero(m);
    Matrix rows(static_cast<Eigen::Index>(n), m);
    const std::size_t end = std::min(n, (b + 1) * detail::kKernelBlockRows);
    for (std::size_t i = b * detail::kKernelBlockRows; i < end; ++i) {
      detail::fill_rows(sources, i, rows);
      acc.array() += rows.colwise().sum().transpose().array().log();
    }
    partial[b] = std::move(acc);
  });
  Vector total = Vector::Zero(m);
  for (const auto& p : partial) total += p;
  const double nd = static_cast<double>(n);
  return ((std::log(nd) - total.array() / nd) / kLn2).matrix();
}

}  // namespace infocomp
