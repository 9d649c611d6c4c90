#include "mmboot/moments.hpp"

#include <algorithm>
#include <cmath>

#include "mmboot/errors.hpp"

namespace mmboot {
namespace {

double ipow(double x, int k) {
  double out = 1.0;
  for (int e = 0; e < k; ++e) out *= x;
  return out;
}

double pair_count(const Dataset& d) {
  double count = 0.0;
  for (Index i = 0; i < d.num_clusters(); ++i) {
    const auto ni = static_cast<double>(d.cluster_size(i));
    count += ni * (ni - 1.0);
  }
  return count;
}

}  // namespace

Eigen::VectorXd residuals(const Dataset& d, const FixedEffects& fe) {
  return (d.y() - d.x() * fe.beta).array() - fe.mu;
}

double pair_contrast_moment(const Dataset& d, const Eigen::VectorXd& resid, int k,
                            double s_coef, double t_coef) {
  if (k < 0) fail(ErrorCode::invalid_argument, "moment order must be non-negative");
  double total = 0.0;
  for (Index i = 0; i < d.num_clusters(); ++i) {
    const auto r = resid.segment(d.offset(i), d.cluster_size(i));
    double cluster_total = 0.0;
    for (Index j1 = 0; j1 < r.size(); ++j1) {
      for (Index j2 = j1 + 1; j2 < r.size(); ++j2) {
        cluster_total += ipow(s_coef * r(j1) + t_coef * r(j2), k) +
                         ipow(s_coef * r(j2) + t_coef * r(j1), k);
      }
    }
    total += cluster_total;
  }
  return total / pair_count(d);
}

double pair_contrast_moment(const Dataset& d, const FixedEffects& fe, int k, double s_coef,
                            double t_coef) {
  return pair_contrast_moment(d, residuals(d, fe), k, s_coef, t_coef);
}

PairDesignConstants pair_design_constants(const Dataset& d) {
  PairDesignConstants c;
  double a4_num = 0.0;
  double cross = 0.0;
  for (Index i = 0; i < d.num_clusters(); ++i) {
    const auto s2 = d.cluster_s(i).array().square();
    const double sum2 = s2.sum();
    const double sum4 = s2.square().sum();
    a4_num += static_cast<double>(d.cluster_size(i) - 1) * sum4;
    cross += sum2 * sum2 - sum4;
    c.sum_s2 += sum2;
    c.sum_s4 += sum4;
  }
  const double pairs = pair_count(d);
  c.a4 = a4_num / pairs;
  c.c_pair = cross / pairs;
  return c;
}

double estimate_gamma_v(const Dataset& d, const Eigen::VectorXd& resid, double sigma2_v) {
  const PairDesignConstants c = pair_design_constants(d);
  const double w4 = pair_contrast_moment(d, resid, 4, 1.0, -1.0);
  const double sigma4 = sigma2_v * sigma2_v;
  return std::max((w4 - 6.0 * c.c_pair * sigma4) / (2.0 * c.a4), sigma4);
}

double estimate_gamma_v(const Dataset& d, const FixedEffects& fe, double sigma2_v) {
  return estimate_gamma_v(d, residuals(d, fe), sigma2_v);
}

double estimate_gamma_u(const Dataset& d, const Eigen::VectorXd& resid, double sigma2_u,
                        double sigma2_v, double gamma_v) {
  const PairDesignConstants c = pair_design_constants(d);
  const double sum_r4 = resid.array().square().square().sum();
  const double raw = (sum_r4 - 6.0 * sigma2_u * sigma2_v * c.sum_s2 - gamma_v * c.sum_s4) /
                     static_cast<double>(d.num_observations());
  return std::max(raw, sigma2_u * sigma2_u);
}

double estimate_gamma_u(const Dataset& d, const FixedEffects& fe, double sigma2_u,
                        double sigma2_v, double gamma_v) {
  return estimate_gamma_u(d, residuals(d, fe), sigma2_u, sigma2_v, gamma_v);
}

FourthMoments estimate_fourth_moments(const Dataset& d, const FixedEffects& fe,
                                      const VarianceComponents& vc) {
  const Eigen::VectorXd resid = residuals(d, fe);
  FourthMoments fm;
  fm.gamma_v = estimate_gamma_v(d, resid, vc.sigma2_v);
  fm.gamma_u = estimate_gamma_u(d, resid, vc.sigma2_u, vc.sigma2_v, fm.gamma_v);
  return fm;
}

}  // namespace mmboot
