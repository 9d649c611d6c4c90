#include "mmboot/mspe.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mmboot/errors.hpp"
#include "mmboot/parallel.hpp"

namespace mmboot {

double GFunction::operator()(double t, Index n) const {
  if (kind == GKind::arctan) return std::atan(t);
  const double cap = static_cast<double>(n) * c_clip;
  return std::copysign(std::min(std::abs(t), cap), t);
}

std::string_view to_string(GKind g) noexcept { return g == GKind::arctan ? "arctan" : "clipped"; }

GKind parse_g_kind(std::string_view name) {
  if (name == "arctan") return GKind::arctan;
  if (name == "clipped") return GKind::clipped;
  fail(ErrorCode::invalid_argument, "unknown g '" + std::string(name) +
                                        "' (expected arctan or clipped)");
}

BootstrapConfig BootstrapConfig::desk() {
  BootstrapConfig cfg;
  cfg.b1 = 100;
  cfg.b2 = 50;
  cfg.c = 50;
  return cfg;
}

void BootstrapConfig::validate() const {
  if (b1 < 1 || b2 < 1 || c < 1) {
    fail(ErrorCode::invalid_argument, "b1, b2 and c must all be at least 1");
  }
  if (g.kind == GKind::clipped && !(g.c_clip > 0.0)) {
    fail(ErrorCode::invalid_argument, "clipping constant must be positive");
  }
  if (!(max_failure_rate >= 0.0) || max_failure_rate >= 1.0) {
    fail(ErrorCode::invalid_argument, "max failure rate must lie in [0, 1)");
  }
  ridge.validate();
}

BootstrapWorld bootstrap_world(const Dataset& d, const FixedEffects& fe,
                               const VarianceComponents& vc, const FourthMoments& fm,
                               Family family, Rng& rng, Index* fallbacks) {
  bool fb_u = false;
  bool fb_v = false;
  const auto dist_u = MatchedDistribution::make(family, vc.sigma2_u, fm.gamma_u, &fb_u);
  const auto dist_v = MatchedDistribution::make(family, vc.sigma2_v, fm.gamma_v, &fb_v);
  if (fallbacks) *fallbacks += static_cast<Index>(fb_u) + static_cast<Index>(fb_v);

  const Index n = d.num_clusters();
  const Eigen::VectorXd u = sample(dist_u, rng, n);
  const Eigen::VectorXd v = sample(dist_v, rng, d.num_observations());

  Eigen::VectorXd y = (d.x() * fe.beta).array() + fe.mu;
  Eigen::VectorXd theta(n);
  for (Index i = 0; i < n; ++i) {
    auto yi = y.segment(d.offset(i), d.cluster_size(i));
    theta(i) = yi.mean() + u(i);
    yi.array() += u(i);
  }
  y.array() += d.s().array() * v.array();
  return {d.with_responses(std::move(y)), std::move(theta)};
}

namespace {

struct WorldOutcome {
  std::optional<Eigen::VectorXd> sq_error;
  Index fallbacks = 0;
};

bool is_replicate_failure(const Error& e) { return e.category() == ErrorCategory::numerical; }

/// Squared prediction error of one world generated from (fe, vc, fm).
WorldOutcome run_world(const Estimator& est, const FixedEffects& fe, const VarianceComponents& vc,
                       const FourthMoments& fm, Family family, Rng rng) {
  WorldOutcome out;
  BootstrapWorld world = bootstrap_world(est.design(), fe, vc, fm, family, rng, &out.fallbacks);
  try {
    const FittedModel refit = est.fit(world.data, false);
    out.sq_error = (refit.prediction.theta_hat - world.theta).array().square().matrix();
  } catch (const Error& e) {
    if (!is_replicate_failure(e)) throw;
  }
  return out;
}

void check_failures(Index failures, Index attempts, double rate, const char* level) {
  if (static_cast<double>(failures) > rate * static_cast<double>(attempts)) {
    fail(ErrorCode::too_many_failures, std::to_string(failures) + " of " + std::to_string(attempts) +
                                           " " + level + " bootstrap replicates failed");
  }
}

}  // namespace

SingleBootstrap mse_single(const Estimator& est, const FittedModel& fitted,
                           const BootstrapConfig& cfg) {
  cfg.validate();
  const Index n = est.design().num_clusters();
  std::vector<WorldOutcome> outcomes(static_cast<std::size_t>(cfg.b1));
  parallel_for(outcomes.size(), cfg.jobs, [&](std::size_t b) {
    outcomes[b] = run_world(est, fitted.fixed, fitted.variance, fitted.moments, cfg.family,
                            make_stream(cfg.master_seed, Stream::single_bootstrap, b));
  });

  SingleBootstrap out;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n);
  for (const auto& o : outcomes) {
    out.fallbacks += o.fallbacks;
    if (!o.sq_error) {
      ++out.failures;
      continue;
    }
    ++out.replicates;
    sum += *o.sq_error;
    sum_sq += o.sq_error->array().square().matrix();
  }
  check_failures(out.failures, cfg.b1, cfg.max_failure_rate, "single");

  const auto b = static_cast<double>(out.replicates);
  out.mse = sum / b;
  if (out.replicates > 1) {
    const Eigen::ArrayXd var = ((sum_sq.array() - b * out.mse.array().square()) / (b - 1.0)).max(0.0);
    out.std_error = (var / b).sqrt().matrix();
  } else {
    out.std_error = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

SingleBootstrap mse_single(const Dataset& d, const FittedModel& fitted, const BootstrapConfig& cfg) {
  return mse_single(Estimator(d, cfg.ridge), fitted, cfg);
}

double robust_correction(double u, double v, Index n, const GFunction& g) {
  const auto nd = static_cast<double>(n);
  if (u >= v) return u + g(nd * (u - v), n) / nd;
  const double denom = u + g(nd * (v - u), n) / nd;
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    fail(ErrorCode::division_guard, "robust correction denominator is not positive");
  }
  return u * u / denom;
}

namespace {

struct OuterOutcome {
  std::optional<Eigen::VectorXd> inner_mse;
  Index inner_failures = 0;
  Index fallbacks = 0;
};

}  // namespace

MspeReport mse_double(const Estimator& est, const FittedModel& fitted, const BootstrapConfig& cfg) {
  cfg.validate();
  const Dataset& d = est.design();
  const Index n = d.num_clusters();

  MspeReport report;
  report.eblup = fitted.prediction.theta_hat;
  report.rho = fitted.prediction.rho;
  report.naive = fitted.prediction.naive_mse;

  const SingleBootstrap single = mse_single(est, fitted, cfg);
  report.mse_boot = single.mse;
  report.mse_boot_se = single.std_error;
  report.single_failures = single.failures;
  report.family_fallbacks = single.fallbacks;

  std::vector<OuterOutcome> outer(static_cast<std::size_t>(cfg.b2));
  parallel_for(outer.size(), cfg.jobs, [&](std::size_t b) {
    OuterOutcome& out = outer[b];
    Rng rng = make_stream(cfg.master_seed, Stream::outer_bootstrap, b);
    BootstrapWorld world = bootstrap_world(d, fitted.fixed, fitted.variance, fitted.moments,
                                           cfg.family, rng, &out.fallbacks);
    FittedModel outer_fit;
    try {
      outer_fit = est.fit(world.data, true);
    } catch (const Error& e) {
      if (!is_replicate_failure(e)) throw;
      return;
    }
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    Index ok = 0;
    for (Index k = 0; k < cfg.c; ++k) {
      WorldOutcome inner =
          run_world(est, outer_fit.fixed, outer_fit.variance, outer_fit.moments, cfg.family,
                    make_stream(cfg.master_seed, Stream::inner_bootstrap, b,
                                static_cast<std::uint64_t>(k)));
      out.fallbacks += inner.fallbacks;
      if (!inner.sq_error) {
        ++out.inner_failures;
        continue;
      }
      sum += *inner.sq_error;
      ++ok;
    }
    if (ok > 0) out.inner_mse = sum / static_cast<double>(ok);
  });

  Eigen::VectorXd v_sum = Eigen::VectorXd::Zero(n);
  Index outer_ok = 0;
  for (const auto& o : outer) {
    report.inner_failures += o.inner_failures;
    report.family_fallbacks += o.fallbacks;
    if (!o.inner_mse) {
      ++report.outer_failures;
      continue;
    }
    v_sum += *o.inner_mse;
    ++outer_ok;
  }
  check_failures(report.outer_failures, cfg.b2, cfg.max_failure_rate, "outer");
  check_failures(report.inner_failures, cfg.b2 * cfg.c, cfg.max_failure_rate, "inner");

  report.mse_double = v_sum / static_cast<double>(outer_ok);
  report.bias_boot = report.mse_double - report.mse_boot;
  report.mse_bc_simple = 2.0 * report.mse_boot - report.mse_double;
  report.mse_bc_robust.resize(n);
  for (Index i = 0; i < n; ++i) {
    report.mse_bc_robust(i) = robust_correction(report.mse_boot(i), report.mse_double(i), n, cfg.g);
  }
  return report;
}

MspeReport mse_double(const Dataset& d, const FittedModel& fitted, const BootstrapConfig& cfg) {
  return mse_double(Estimator(d, cfg.ridge), fitted, cfg);
}

}  // namespace mmboot
