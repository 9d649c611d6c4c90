#pragma once

#include <Eigen/Dense>

#include "mmboot/gls.hpp"
#include "mmboot/model.hpp"
#include "mmboot/variance.hpp"

namespace mmboot {

/// EBLUP of the small-area means Theta_i = mu + Xunderline_i' beta + U_i.
struct Prediction {
  Eigen::VectorXd theta_hat;
  Eigen::VectorXd rho;        // shrinkage factors in [0, 1]
  Eigen::VectorXd naive_mse;  // leading-term MSE with plug-in components
};

/// rho = sigma_U^2 / (sigma_U^2 + a^-1 sigma_V^2)
double shrinkage_factor(double sigma2_u, double sigma2_v, double a_i);

/// sigma_U^2 a^-1 sigma_V^2 / (sigma_U^2 + a^-1 sigma_V^2); zero when sigma_U^2 = 0.
double naive_mse(double sigma2_u, double sigma2_v, double a_i);
double naive_mse(const VarianceComponents& vc, double a_i);

/// mu + Xunderline_i' beta for every cluster.
Eigen::VectorXd synthetic_part(const ClusterSummaries& cs, const FixedEffects& fe);

/// theta_hat_i = mu + Xunderline_i' beta + rho_i (Ybar_i - mu - Xbar_i' beta).
Prediction eblup(const Dataset& d, const ClusterSummaries& cs, const FixedEffects& fe,
                 const VarianceComponents& vc);

}  // namespace mmboot
