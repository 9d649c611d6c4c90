#include "mmboot/variance.hpp"

#include <cmath>

#include "mmboot/errors.hpp"

namespace mmboot {

double Ridge::floor(Index n) const { return b1 * std::pow(static_cast<double>(n), -b2); }

void Ridge::validate() const {
  if (!(b1 > 0.0) || !(b2 >= 2.0) || !std::isfinite(b1) || !std::isfinite(b2)) {
    fail(ErrorCode::invalid_argument, "ridge requires B1 > 0 and B2 >= 2");
  }
}

WithinSolver::WithinSolver(const CenteredSystem& sys) : offsets_(sys.block_offsets) {
  factors_.reserve(sys.t_blocks.size());
  for (const auto& t : sys.t_blocks) {
    factors_.emplace_back(t);
    if (factors_.back().info() != Eigen::Success) {
      fail(ErrorCode::singular_block, "covariance block is not positive definite");
    }
  }
  whitened_p_ = sys.p.transpose();
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Index start = offsets_[i];
    const Index len = offsets_[i + 1] - start;
    auto rows = whitened_p_.middleRows(start, len);
    factors_[i].matrixL().solveInPlace(rows);
  }
  qr_.compute(whitened_p_);
}

void WithinSolver::whiten(Eigen::VectorXd& v) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Index start = offsets_[i];
    const Index len = offsets_[i + 1] - start;
    auto seg = v.segment(start, len);
    factors_[i].matrixL().solveInPlace(seg);
  }
}

WithinSolver::Solution WithinSolver::solve(const Eigen::VectorXd& q) const {
  Eigen::VectorXd wq = q;
  whiten(wq);
  Solution out;
  out.beta = qr_.solve(wq);
  out.sse = (wq - whitened_p_ * out.beta).squaredNorm();
  return out;
}

BetweenSolver::BetweenSolver(const UncenteredSystem& sys, const Dataset& d)
    : p_bar_t_(sys.p_bar.transpose()), qr_(p_bar_t_), r_aug_(sys.r_aug) {
  const Eigen::VectorXd w = d.s().array().square().inverse();
  k1_ = w.sum();

  // sum_ij s^-2 Xa Xa' equals P_bar P_bar'.
  const Eigen::MatrixXd gram = sys.p_bar * sys.p_bar.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) {
    fail(ErrorCode::rank_deficient, "augmented design Gram matrix is singular");
  }
  k2_ = 0.0;
  Eigen::VectorXd b(r_aug_);
  for (Index i = 0; i < d.num_clusters(); ++i) {
    const auto wi = w.segment(d.offset(i), d.cluster_size(i));
    b(0) = wi.sum();
    b.tail(r_aug_ - 1) = d.cluster_x(i).transpose() * wi;
    k2_ += b.dot(ldlt.solve(b));
  }
}

double BetweenSolver::sse(const Eigen::VectorXd& q_bar) const {
  const Eigen::VectorXd beta = qr_.solve(q_bar);
  return (q_bar - p_bar_t_ * beta).squaredNorm();
}

SigmaVEstimate sigma2_v_from_sse(double raw_sse1, Index n, Index total, Index r,
                                 const Ridge& ridge) {
  const Index dof = total - n - r;
  if (dof < 1) {
    fail(ErrorCode::insufficient_degrees_of_freedom, "N - n - r must be at least 1");
  }
  const double sse1 = std::max(raw_sse1, ridge.floor(n));
  return {sse1 / static_cast<double>(dof), sse1};
}

SigmaVEstimate estimate_sigma2_v(const CenteredSystem& sys, Index n, Index r, const Ridge& ridge) {
  const WithinSolver solver(sys);
  const auto sol = solver.solve(sys.q);
  return sigma2_v_from_sse(sol.sse, n, sys.rows() + n, r, ridge);
}

SigmaUEstimate sigma2_u_from_sse(double sse2, double k, Index total, Index r_aug, double sigma2_v) {
  if (!(k > 0.0)) {
    fail(ErrorCode::non_positive_k, "K = K1 - K2 must be positive, got " + std::to_string(k));
  }
  const double raw = (sse2 - static_cast<double>(total - r_aug) * sigma2_v) / k;
  return {std::max(raw, 0.0), sse2, k};
}

SigmaUEstimate estimate_sigma2_u(const UncenteredSystem& sys, const Dataset& d, double sigma2_v) {
  const BetweenSolver solver(sys, d);
  return sigma2_u_from_sse(solver.sse(sys.q_bar), solver.k(), d.num_observations(), sys.r_aug,
                           sigma2_v);
}

double k_constant(const Dataset& d) { return BetweenSolver(uncenter(d), d).k(); }

VarianceComponents estimate_variance_components(const Dataset& d, const Ridge& ridge) {
  const ClusterSummaries cs = summarize(d);
  const CenteredSystem centered = center(d, cs);
  const auto v = estimate_sigma2_v(centered, d.num_clusters(), d.dim(), ridge);
  const UncenteredSystem uncentered = uncenter(d);
  const auto u = estimate_sigma2_u(uncentered, d, v.sigma2_v);
  return {u.sigma2_u, v.sigma2_v, v.sse1, u.sse2, u.k};
}

}  // namespace mmboot
