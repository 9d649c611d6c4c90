#pragma once

#include <Eigen/Dense>

#include "mmboot/gls.hpp"
#include "mmboot/model.hpp"
#include "mmboot/variance.hpp"

namespace mmboot {

struct FourthMoments {
  double gamma_u = 0.0;  // E U^4
  double gamma_v = 0.0;  // E V^4
};

/// Y_ij - mu - X_ij' beta, cluster-grouped.
Eigen::VectorXd residuals(const Dataset& d, const FixedEffects& fe);

/// Average of (s r_ij1 + t r_ij2)^k over ordered pairs j1 != j2 within each
/// cluster and over clusters; denominator sum_i n_i (n_i - 1). Each unordered
/// pair is visited once and both orientations are added, which reproduces the
/// ordered-pair average for every (s, t, k).
double pair_contrast_moment(const Dataset& d, const Eigen::VectorXd& resid, int k,
                            double s_coef, double t_coef);
double pair_contrast_moment(const Dataset& d, const FixedEffects& fe, int k, double s_coef,
                            double t_coef);

/// Design constants entering E{W(1,-1)^4} = 2 a4 gamma_V + 6 c_pair sigma_V^4.
struct PairDesignConstants {
  double a4 = 0.0;      // [sum_i (n_i - 1) sum_j s^4] / [sum_i n_i (n_i - 1)]
  double c_pair = 0.0;  // [sum_i {(sum_j s^2)^2 - sum_j s^4}] / [sum_i n_i (n_i - 1)]
  double sum_s2 = 0.0;
  double sum_s4 = 0.0;
};

PairDesignConstants pair_design_constants(const Dataset& d);

/// gamma_V = max[(2 a4)^-1 {Wbar_4(1,-1) - 6 c_pair sigma_V^4}, sigma_V^4].
double estimate_gamma_v(const Dataset& d, const Eigen::VectorXd& resid, double sigma2_v);
double estimate_gamma_v(const Dataset& d, const FixedEffects& fe, double sigma2_v);

/// gamma_U = max[N^-1 {sum r^4 - 6 sigma_U^2 sigma_V^2 sum s^2 - gamma_V sum s^4}, sigma_U^4].
double estimate_gamma_u(const Dataset& d, const Eigen::VectorXd& resid, double sigma2_u,
                        double sigma2_v, double gamma_v);
double estimate_gamma_u(const Dataset& d, const FixedEffects& fe, double sigma2_u,
                        double sigma2_v, double gamma_v);

FourthMoments estimate_fourth_moments(const Dataset& d, const FixedEffects& fe,
                                      const VarianceComponents& vc);

}  // namespace mmboot
