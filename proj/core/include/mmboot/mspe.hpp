#pragma once

#include <cstdint>
#include <functional>
#include <string_view>

#include <Eigen/Dense>

#include "mmboot/mmdist.hpp"
#include "mmboot/pipeline.hpp"
#include "mmboot/rng.hpp"

namespace mmboot {

enum class GKind { arctan, clipped };

/// Bounded, odd correction function used by the positivity-preserving
/// bias correction: arctan(t), or sgn(t) min(|t|, n c_clip).
struct GFunction {
  GKind kind = GKind::arctan;
  double c_clip = 1.0;

  double operator()(double t, Index n) const;
};

std::string_view to_string(GKind g) noexcept;
GKind parse_g_kind(std::string_view name);

struct BootstrapConfig {
  Index b1 = 400;  // worlds for the single-bootstrap MSE
  Index b2 = 200;  // outer worlds for the double bootstrap
  Index c = 100;   // inner worlds per outer world
  Family family = Family::three_point;
  GFunction g;
  std::uint64_t master_seed = 0;
  Ridge ridge;
  unsigned jobs = 1;  // 0 = all cores; output does not depend on it
  double max_failure_rate = 0.01;

  static BootstrapConfig production() { return {}; }
  static BootstrapConfig desk();

  /// Errors: InvalidArgument.
  void validate() const;
};

/// Synthetic data on the original design plus the targets it was built around:
///   Y*_ij = mu + X_ij' beta + U*_i + s_ij V*_ij,   Theta*_i = mu + Xunderline_i' beta + U*_i
/// with U* ~ D(sigma_U^2, gamma_U) and V* ~ D(sigma_V^2, gamma_V).
struct BootstrapWorld {
  Dataset data;
  Eigen::VectorXd theta;
};

/// Draws U* for every cluster first, then V* for every observation.
/// fallbacks (if given) is incremented for each student_t -> three_point fallback.
BootstrapWorld bootstrap_world(const Dataset& d, const FixedEffects& fe,
                               const VarianceComponents& vc, const FourthMoments& fm,
                               Family family, Rng& rng, Index* fallbacks = nullptr);

struct SingleBootstrap {
  Eigen::VectorXd mse;        // average of (Theta_hat* - Theta*)^2 over successful worlds
  Eigen::VectorXd std_error;  // Monte Carlo standard error of mse
  Index replicates = 0;       // successful worlds
  Index failures = 0;
  Index fallbacks = 0;
};

/// Errors: TooManyFailures when more than max_failure_rate of the worlds fail.
SingleBootstrap mse_single(const Estimator& est, const FittedModel& fitted,
                           const BootstrapConfig& cfg);
SingleBootstrap mse_single(const Dataset& d, const FittedModel& fitted, const BootstrapConfig& cfg);

struct MspeReport {
  Eigen::VectorXd eblup;
  Eigen::VectorXd rho;
  Eigen::VectorXd naive;          // leading-term plug-in MSE
  Eigen::VectorXd mse_boot;       // u: single bootstrap
  Eigen::VectorXd mse_boot_se;
  Eigen::VectorXd mse_double;     // v: mean over outer worlds of the inner MSE
  Eigen::VectorXd bias_boot;      // v - u
  Eigen::VectorXd mse_bc_simple;  // 2u - v
  Eigen::VectorXd mse_bc_robust;  // positivity-preserving correction
  Index single_failures = 0;
  Index outer_failures = 0;
  Index inner_failures = 0;
  Index family_fallbacks = 0;
};

/// u from its own b1 worlds; v from b2 outer worlds, each refit in full
/// (fourth moments included) and followed by c inner worlds generated around
/// the outer fit.
/// Errors: TooManyFailures, DivisionGuard.
MspeReport mse_double(const Estimator& est, const FittedModel& fitted, const BootstrapConfig& cfg);
MspeReport mse_double(const Dataset& d, const FittedModel& fitted, const BootstrapConfig& cfg);

/// u + n^-1 g{n(u - v)}            if u >= v
/// u^2 / [u + n^-1 g{n(v - u)}]    otherwise
/// Errors: DivisionGuard when the lower-branch denominator is not positive.
double robust_correction(double u, double v, Index n, const GFunction& g);

}  // namespace mmboot
