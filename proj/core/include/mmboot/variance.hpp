#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mmboot/model.hpp"
#include "mmboot/transform.hpp"

namespace mmboot {

/// Floor B1 n^-B2 applied to SSE1 (B1 > 0, B2 >= 2).
struct Ridge {
  double b1 = 1e-6;
  double b2 = 2.0;

  double floor(Index n) const;
  void validate() const;
};

/// Method-of-moments variance components.
struct VarianceComponents {
  double sigma2_u = 0.0;
  double sigma2_v = 1.0;
  double sse1 = 0.0;        // after the ridge floor
  double sse2 = 0.0;
  double k_constant = 0.0;  // K = K1 - K2
};

/// Weighted least squares for the centered system, reusable across response
/// vectors on the same design. Each T_i is Cholesky-factored once; the
/// regression is solved on the whitened system L^-1 q = L^-1 P' beta + L^-1 e,
/// so SSE1 = |L^-1 (q - P' beta)|^2 = e_hat' T^-1 e_hat.
class WithinSolver {
 public:
  explicit WithinSolver(const CenteredSystem& sys);

  struct Solution {
    Eigen::VectorXd beta;
    double sse = 0.0;  // raw, before the ridge floor
  };

  Solution solve(const Eigen::VectorXd& q) const;

 private:
  void whiten(Eigen::VectorXd& v) const;

  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
  std::vector<Index> offsets_;
  Eigen::MatrixXd whitened_p_;  // (N - n) x r
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
};

/// Ordinary least squares for the uncentered system, plus the design constant
/// K = K1 - K2 in E(SSE2) = K sigma_U^2 + (N - r_aug) sigma_V^2.
class BetweenSolver {
 public:
  BetweenSolver(const UncenteredSystem& sys, const Dataset& d);

  double sse(const Eigen::VectorXd& q_bar) const;
  double k() const { return k1_ - k2_; }
  double k1() const { return k1_; }
  double k2() const { return k2_; }
  Index r_aug() const { return r_aug_; }

 private:
  Eigen::MatrixXd p_bar_t_;  // N x r_aug
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  double k1_ = 0.0;
  double k2_ = 0.0;
  Index r_aug_ = 0;
};

struct SigmaVEstimate {
  double sigma2_v;
  double sse1;  // floored
};

struct SigmaUEstimate {
  double sigma2_u;
  double sse2;
  double k;
};

/// sigma_V^2 = max(SSE1, B1 n^-B2) / (N - n - r).
SigmaVEstimate estimate_sigma2_v(const CenteredSystem& sys, Index n, Index r, const Ridge& ridge);

/// Ridge floor and degrees-of-freedom division for a raw SSE1.
SigmaVEstimate sigma2_v_from_sse(double raw_sse1, Index n, Index total, Index r,
                                 const Ridge& ridge);

/// sigma_U^2 = max(K^-1 {SSE2 - (N - r_aug) sigma_V^2}, 0).
/// Errors: NonPositiveK, RankDeficient.
SigmaUEstimate estimate_sigma2_u(const UncenteredSystem& sys, const Dataset& d, double sigma2_v);

SigmaUEstimate sigma2_u_from_sse(double sse2, double k, Index total, Index r_aug, double sigma2_v);

/// K1 = sum_ij s_ij^-2,
/// K2 = sum_i b_i' (sum_ij s_ij^-2 Xa_ij Xa_ij')^-1 b_i, b_i = sum_j s_ij^-2 Xa_ij,
/// where Xa_ij = (1, X_ij')' is the intercept-augmented covariate.
double k_constant(const Dataset& d);

/// Full two-stage estimate on one dataset.
VarianceComponents estimate_variance_components(const Dataset& d, const Ridge& ridge = {});

}  // namespace mmboot
