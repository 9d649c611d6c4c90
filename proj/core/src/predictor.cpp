#include "mmboot/predictor.hpp"

#include "mmboot/errors.hpp"

namespace mmboot {

double shrinkage_factor(double sigma2_u, double sigma2_v, double a_i) {
  if (sigma2_u <= 0.0) return 0.0;
  return sigma2_u / (sigma2_u + sigma2_v / a_i);
}

double naive_mse(double sigma2_u, double sigma2_v, double a_i) {
  if (!(a_i > 0.0)) fail(ErrorCode::invalid_argument, "a_i must be positive");
  if (sigma2_u <= 0.0) return 0.0;
  const double within = sigma2_v / a_i;
  return sigma2_u * within / (sigma2_u + within);
}

double naive_mse(const VarianceComponents& vc, double a_i) {
  return naive_mse(vc.sigma2_u, vc.sigma2_v, a_i);
}

Eigen::VectorXd synthetic_part(const ClusterSummaries& cs, const FixedEffects& fe) {
  return (cs.x_underline * fe.beta).array() + fe.mu;
}

Prediction eblup(const Dataset& d, const ClusterSummaries& cs, const FixedEffects& fe,
                 const VarianceComponents& vc) {
  const Index n = d.num_clusters();
  Prediction p{synthetic_part(cs, fe), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const Eigen::VectorXd direct_resid = (cs.y_bar - cs.x_bar * fe.beta).array() - fe.mu;
  for (Index i = 0; i < n; ++i) {
    p.rho(i) = shrinkage_factor(vc.sigma2_u, vc.sigma2_v, cs.a(i));
    p.naive_mse(i) = naive_mse(vc.sigma2_u, vc.sigma2_v, cs.a(i));
    p.theta_hat(i) += p.rho(i) * direct_resid(i);
  }
  return p;
}

}  // namespace mmboot
