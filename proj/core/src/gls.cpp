#include "mmboot/gls.hpp"

#include <cmath>

#include "mmboot/errors.hpp"

namespace mmboot {
namespace {

void check_components(double sigma2_u, double sigma2_v) {
  if (!(sigma2_v > 0.0) || !std::isfinite(sigma2_v) || !(sigma2_u >= 0.0) ||
      !std::isfinite(sigma2_u)) {
    fail(ErrorCode::singular_weight, "weight matrix requires sigma_V^2 > 0 and sigma_U^2 >= 0");
  }
}

}  // namespace

ClusterWeight::ClusterWeight(const Eigen::VectorXd& s, double sigma2_u, double sigma2_v)
    : diag_(sigma2_v * s.array().square()), sigma2_u_(sigma2_u) {
  check_components(sigma2_u, sigma2_v);
}

Eigen::MatrixXd ClusterWeight::matrix() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(size(), size(), sigma2_u_);
  w.diagonal() += diag_;
  return w;
}

Eigen::MatrixXd ClusterWeight::inverse() const {
  const Eigen::VectorXd d_inv = diag_.cwiseInverse();
  const double c = sigma2_u_ / (1.0 + sigma2_u_ * d_inv.sum());
  Eigen::MatrixXd inv = -c * d_inv * d_inv.transpose();
  inv.diagonal() += d_inv;
  return inv;
}

Eigen::VectorXd ClusterWeight::solve(const Eigen::VectorXd& rhs) const {
  const Eigen::VectorXd d_inv = diag_.cwiseInverse();
  const double c = sigma2_u_ / (1.0 + sigma2_u_ * d_inv.sum());
  const Eigen::VectorXd z = rhs.cwiseProduct(d_inv);
  return z - (c * z.sum()) * d_inv;
}

std::vector<ClusterWeight> cluster_weights(const Dataset& d, const VarianceComponents& vc) {
  std::vector<ClusterWeight> out;
  out.reserve(static_cast<std::size_t>(d.num_clusters()));
  for (Index i = 0; i < d.num_clusters(); ++i) {
    out.emplace_back(d.cluster_s(i), vc.sigma2_u, vc.sigma2_v);
  }
  return out;
}

GlsSolver::GlsSolver(const Dataset& design) {
  const Index n = design.num_clusters();
  const Index r_aug = design.dim() + 1;
  const Eigen::VectorXd w = design.s().array().square().inverse();

  weighted_design_.resize(design.num_observations(), r_aug);
  weighted_design_.col(0) = w;
  weighted_design_.rightCols(r_aug - 1) = design.x().array().colwise() * w.array();

  Eigen::MatrixXd augmented(design.num_observations(), r_aug);
  augmented.col(0).setOnes();
  augmented.rightCols(r_aug - 1) = design.x();
  a_total_ = augmented.transpose() * weighted_design_;

  b_.resize(n, r_aug);
  a_.resize(n);
  for (Index i = 0; i < n; ++i) {
    b_.row(i) = weighted_design_.middleRows(design.offset(i), design.cluster_size(i)).colwise().sum();
    a_(i) = b_(i, 0);
  }
}

FixedEffects GlsSolver::solve(const Dataset& d, double sigma2_u, double sigma2_v) const {
  check_components(sigma2_u, sigma2_v);
  const Eigen::VectorXd kappa = sigma2_u / (sigma2_v + sigma2_u * a_.array());

  // Rows of weighted_design_ summed per cluster against y give b_i-weighted
  // cluster totals; a_i Ybar_i is the first column.
  const Eigen::VectorXd rhs_full = weighted_design_.transpose() * d.y();
  Eigen::VectorXd cluster_totals(a_.size());
  for (Index i = 0; i < a_.size(); ++i) {
    cluster_totals(i) = weighted_design_.col(0).segment(d.offset(i), d.cluster_size(i))
                            .dot(d.cluster_y(i));
  }

  const Eigen::MatrixXd normal = a_total_ - b_.transpose() * kappa.asDiagonal() * b_;
  const Eigen::VectorXd rhs =
      rhs_full - b_.transpose() * kappa.cwiseProduct(cluster_totals);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) {
    fail(ErrorCode::rank_deficient, "GLS normal matrix is singular");
  }
  const Eigen::VectorXd theta = ldlt.solve(rhs);
  if (!theta.allFinite()) fail(ErrorCode::rank_deficient, "GLS solution is not finite");
  return {theta(0), theta.tail(theta.size() - 1)};
}

FixedEffects fit_fixed_effects(const Dataset& d, const VarianceComponents& vc) {
  return GlsSolver(d).solve(d, vc.sigma2_u, vc.sigma2_v);
}

}  // namespace mmboot
