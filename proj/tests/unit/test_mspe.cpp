#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "mmboot/errors.hpp"
#include "mmboot/mspe.hpp"
#include "mmboot/simulate.hpp"

using namespace mmboot;

namespace {

struct Setup {
  Dataset design;
  Estimator est;
  FittedModel fit;
};

Setup standard_setup(std::uint64_t seed, Index n = 60) {
  Scenario sc;
  sc.n = n;
  Rng design_rng = make_stream(seed, Stream::study_design);
  Dataset design = make_design(sc, design_rng);
  Estimator est(design);
  Rng data_rng = make_stream(seed, Stream::study_data, 0);
  const SimulatedSample sample = simulate_sample(design, sc, ErrorModel{ModelKind::m1}, data_rng);
  FittedModel fit = est.fit(sample.data, true);
  return {design, std::move(est), std::move(fit)};
}

BootstrapConfig small_config(std::uint64_t seed) {
  BootstrapConfig cfg;
  cfg.b1 = 40;
  cfg.b2 = 8;
  cfg.c = 10;
  cfg.master_seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("robust correction examples") {
  const GFunction g;
  CHECK(robust_correction(0.25, 0.20, 60, g) == doctest::Approx(0.25 + std::atan(3.0) / 60));
  CHECK(std::abs(robust_correction(0.25, 0.20, 60, g) - 0.2708174295399709) < 1e-12);
  CHECK(std::abs(robust_correction(0.20, 0.25, 60, g) - 0.18114512103203095) < 1e-12);
  CHECK(robust_correction(0.3, 0.3, 60, g) == 0.3);
  GFunction clipped{GKind::clipped, 1.0};
  CHECK(robust_correction(0.3, 0.3, 60, clipped) == 0.3);
}

TEST_CASE("clipped g caps at n c") {
  const GFunction g{GKind::clipped, 0.5};
  CHECK(g(3.0, 10) == 3.0);
  CHECK(g(30.0, 10) == 5.0);
  CHECK(g(-30.0, 10) == -5.0);
  CHECK(GFunction{}(1.0, 10) == doctest::Approx(std::numbers::pi / 4));
  CHECK(parse_g_kind("clipped") == GKind::clipped);
  CHECK_THROWS_AS(parse_g_kind("tanh"), Error);
}

TEST_CASE("robust correction is positive and continuous") {
  Rng rng(81);
  for (int trial = 0; trial < 100000; ++trial) {
    const double u = gen::uniform(rng, 1e-6, 5.0);
    const double v = gen::uniform(rng, 0.0, 5.0);
    const Index n = gen::uniform_int(rng, 2, 500);
    const GFunction g = trial % 2 ? GFunction{} : GFunction{GKind::clipped, gen::uniform(rng, 0.01, 3)};
    const double r = robust_correction(u, v, n, g);
    if (!(r > 0.0)) {
      FAIL("non-positive correction at u=" << u << " v=" << v << " n=" << n);
    }
  }
  for (const double u : {0.01, 0.25, 3.0}) {
    CHECK(std::abs(robust_correction(u, u + 1e-9, 60, GFunction{}) - u) < 1e-8);
    CHECK(std::abs(robust_correction(u, u - 1e-9, 60, GFunction{}) - u) < 1e-8);
  }
}

TEST_CASE("configuration validation") {
  CHECK_NOTHROW(BootstrapConfig{}.validate());
  const BootstrapConfig desk = BootstrapConfig::desk();
  CHECK(desk.b1 == 100);
  CHECK(desk.b2 == 50);
  CHECK(desk.c == 50);
  CHECK(BootstrapConfig::production().b1 == 400);
  BootstrapConfig bad;
  bad.c = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = BootstrapConfig{};
  bad.g = GFunction{GKind::clipped, 0.0};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("bootstrap world with zero sigma_U has synthetic targets") {
  const Setup s = standard_setup(3);
  VarianceComponents vc = s.fit.variance;
  vc.sigma2_u = 0.0;
  FourthMoments fm = s.fit.moments;
  fm.gamma_u = 0.0;
  Rng rng(1);
  const BootstrapWorld w = bootstrap_world(s.design, s.fit.fixed, vc, fm, Family::three_point, rng);
  const Eigen::VectorXd synth = synthetic_part(s.fit.summaries, s.fit.fixed);
  CHECK((w.theta - synth).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(w.data.same_design(s.design));

  Rng a(9);
  Rng b(9);
  const BootstrapWorld wa =
      bootstrap_world(s.design, s.fit.fixed, s.fit.variance, s.fit.moments, Family::student_t, a);
  const BootstrapWorld wb =
      bootstrap_world(s.design, s.fit.fixed, s.fit.variance, s.fit.moments, Family::student_t, b);
  CHECK(wa.data.y() == wb.data.y());
  CHECK(wa.theta == wb.theta);
}

TEST_CASE("bootstrap cluster effects carry the fitted moments") {
  const Setup s = standard_setup(4, 5);
  VarianceComponents vc = s.fit.variance;
  vc.sigma2_u = 0.7;
  FourthMoments fm = s.fit.moments;
  fm.gamma_u = 0.7 * 0.7 * 2.5;
  const Eigen::VectorXd synth = synthetic_part(s.fit.summaries, s.fit.fixed);
  Rng rng(10);
  double m1 = 0, m2 = 0, m4 = 0, m8 = 0;
  const int worlds = 100000;
  for (int k = 0; k < worlds; ++k) {
    const BootstrapWorld w = bootstrap_world(s.design, s.fit.fixed, vc, fm, Family::three_point, rng);
    for (Index i = 0; i < 5; ++i) {
      const double u = w.theta(i) - synth(i);
      m1 += u;
      m2 += u * u;
      m4 += std::pow(u, 4);
      m8 += std::pow(u, 8);
    }
  }
  const double total = 5.0 * worlds;
  m1 /= total;
  m2 /= total;
  m4 /= total;
  m8 /= total;
  CHECK(std::abs(m1) < 3.0 * std::sqrt(0.7 / total));
  CHECK(std::abs(m2 - 0.7) < 3.0 * std::sqrt((m4 - m2 * m2) / total));
  CHECK(std::abs(m4 - fm.gamma_u) < 3.0 * std::sqrt((m8 - m4 * m4) / total));
}

TEST_CASE("single bootstrap with one world is that world's squared error") {
  const Setup s = standard_setup(5);
  BootstrapConfig cfg = small_config(77);
  cfg.b1 = 1;
  const SingleBootstrap sb = mse_single(s.est, s.fit, cfg);
  Rng rng = make_stream(77, Stream::single_bootstrap, 0);
  const BootstrapWorld w = bootstrap_world(s.design, s.fit.fixed, s.fit.variance, s.fit.moments,
                                           Family::three_point, rng);
  const Eigen::VectorXd expect =
      (s.est.fit(w.data, false).prediction.theta_hat - w.theta).array().square().matrix();
  CHECK(sb.mse == expect);
  CHECK(sb.replicates == 1);
  CHECK(sb.failures == 0);
}

TEST_CASE("bootstrap output is deterministic and independent of the worker count") {
  const Setup s = standard_setup(6);
  BootstrapConfig cfg = small_config(123);
  const MspeReport a = mse_double(s.est, s.fit, cfg);
  const MspeReport b = mse_double(s.design, s.fit, cfg);
  cfg.jobs = 3;
  const MspeReport c = mse_double(s.est, s.fit, cfg);
  CHECK(a.mse_boot == b.mse_boot);
  CHECK(a.mse_double == b.mse_double);
  CHECK(a.mse_boot == c.mse_boot);
  CHECK(a.mse_double == c.mse_double);
  CHECK(a.mse_bc_robust == c.mse_bc_robust);
}

TEST_CASE("double bootstrap report identities") {
  const Setup s = standard_setup(7);
  for (const Family f : {Family::three_point, Family::student_t}) {
    BootstrapConfig cfg = small_config(321);
    cfg.family = f;
    const MspeReport r = mse_double(s.est, s.fit, cfg);
    CHECK(r.bias_boot == r.mse_double - r.mse_boot);
    CHECK(r.mse_bc_simple == 2.0 * r.mse_boot - r.mse_double);
    CHECK((r.mse_boot.array() >= 0.0).all());
    CHECK((r.mse_double.array() >= 0.0).all());
    CHECK((r.mse_bc_robust.array() > 0.0).all());
    CHECK(r.eblup == s.fit.prediction.theta_hat);
    CHECK(r.naive == s.fit.prediction.naive_mse);
    CHECK(r.single_failures + r.outer_failures + r.inner_failures == 0);
  }
}

TEST_CASE("two disjoint seed streams give statistically equivalent estimates") {
  const Setup s = standard_setup(8);
  BootstrapConfig cfg = small_config(1);
  cfg.b1 = 2000;
  const SingleBootstrap a = mse_single(s.est, s.fit, cfg);
  cfg.master_seed = 2;
  const SingleBootstrap b = mse_single(s.est, s.fit, cfg);
  const Eigen::ArrayXd z = (a.mse - b.mse).array().abs() /
                           (a.std_error.array().square() + b.std_error.array().square()).sqrt();
  // per-cluster 3-sigma band; allow the few exceedances expected among 60 clusters
  CHECK((z > 3.0).count() <= 2);
}

TEST_CASE("single bootstrap tracks the simulated MSE on the standard design") {
  Scenario sc;
  const std::uint64_t seed = 2718;
  const Eigen::VectorXd smse = run_truth(sc, ErrorModel{ModelKind::m1}, 5000, seed);
  Rng design_rng = make_stream(seed, Stream::study_design);
  const Dataset design = make_design(sc, design_rng);
  const Estimator est(design);
  double boot = 0.0;
  const int datasets = 40;
  for (int k = 0; k < datasets; ++k) {
    Rng rng = make_stream(seed, Stream::study_data, 10000 + static_cast<std::uint64_t>(k));
    const SimulatedSample sample = simulate_sample(design, sc, ErrorModel{ModelKind::m1}, rng);
    BootstrapConfig cfg = small_config(static_cast<std::uint64_t>(k));
    cfg.b1 = 200;
    boot += mse_single(est, est.fit(sample.data), cfg).mse.mean();
  }
  boot /= datasets;
  CHECK(smse.mean() > 0.25);
  CHECK(boot == doctest::Approx(smse.mean()).epsilon(0.15));
}
