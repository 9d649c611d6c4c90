#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mmboot/model.hpp"
#include "mmboot/variance.hpp"

namespace mmboot {

struct FixedEffects {
  double mu = 0.0;
  Eigen::VectorXd beta;
};

/// W_i = sigma_U^2 11' + sigma_V^2 diag(s_i1^2, ..., s_in_i^2), stored as its
/// diagonal-plus-rank-one parts. Inverse and solves use Sherman-Morrison.
class ClusterWeight {
 public:
  /// Errors: SingularWeight (sigma2_v <= 0 or sigma2_u < 0).
  ClusterWeight(const Eigen::VectorXd& s, double sigma2_u, double sigma2_v);

  Index size() const { return diag_.size(); }
  Eigen::MatrixXd matrix() const;
  Eigen::MatrixXd inverse() const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::VectorXd diag_;  // sigma_V^2 s_ij^2
  double sigma2_u_;
};

std::vector<ClusterWeight> cluster_weights(const Dataset& d, const VarianceComponents& vc);

/// GLS for (mu, beta) with block weights W_i^-1, solved jointly on the
/// intercept-augmented design Xa_ij = (1, X_ij').
///
/// With S_i = diag(s_ij^-2), A_i = Xa_i' S_i Xa_i, b_i = Xa_i' S_i 1 and
/// kappa_i = sigma_U^2 / (sigma_V^2 + sigma_U^2 a_i), Sherman-Morrison gives
///   sigma_V^2 Xa_i' W_i^-1 Xa_i = A_i - kappa_i b_i b_i'
///   sigma_V^2 Xa_i' W_i^-1 Y_i  = Xa_i' S_i Y_i - kappa_i a_i Ybar_i b_i.
/// A_i and b_i depend on the design only and are cached.
class GlsSolver {
 public:
  explicit GlsSolver(const Dataset& design);

  /// Errors: SingularWeight, RankDeficient.
  FixedEffects solve(const Dataset& d, double sigma2_u, double sigma2_v) const;

 private:
  Eigen::MatrixXd a_total_;   // sum_i A_i, r_aug x r_aug
  Eigen::MatrixXd b_;         // n x r_aug, row i = b_i'
  Eigen::VectorXd a_;         // a_i
  Eigen::MatrixXd weighted_design_;  // N x r_aug, rows s_ij^-2 Xa_ij'
};

/// Errors: SingularWeight, RankDeficient.
FixedEffects fit_fixed_effects(const Dataset& d, const VarianceComponents& vc);

}  // namespace mmboot
