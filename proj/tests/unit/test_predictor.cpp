#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "mmboot/errors.hpp"
#include "mmboot/pipeline.hpp"
#include "mmboot/predictor.hpp"
#include "oracle.hpp"

using namespace mmboot;

TEST_CASE("shrinkage factor examples") {
  CHECK(shrinkage_factor(1.0, 1.0, 3.0) == doctest::Approx(0.75));
  CHECK(shrinkage_factor(0.0, 1.0, 3.0) == 0.0);
  const double floor_v = Ridge{}.floor(60) / (180 - 60 - 1);
  CHECK(shrinkage_factor(1.0, floor_v, 3.0) > 0.999);
}

TEST_CASE("naive MSE examples") {
  CHECK(naive_mse(1.0, 1.0, 3.0) == doctest::Approx(0.25));
  CHECK(naive_mse(0.0, 1.0, 3.0) == 0.0);
  CHECK(naive_mse(2.0, 1.0, 1.0) == doctest::Approx(2.0 / 3.0));
  VarianceComponents vc;
  vc.sigma2_u = 1.0;
  vc.sigma2_v = 1.0;
  CHECK(naive_mse(vc, 3.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(naive_mse(vc, 0.0), Error);
}

TEST_CASE("naive MSE is bounded by both variances and nondecreasing in sigma_U^2") {
  Rng rng(61);
  for (int trial = 0; trial < 2000; ++trial) {
    const double su = gen::uniform(rng, 0.0, 5.0);
    const double sv = gen::uniform(rng, 1e-6, 5.0);
    const double a = gen::uniform(rng, 0.1, 20.0);
    const double psi = naive_mse(su, sv, a);
    CHECK(psi >= 0.0);
    CHECK(psi <= std::min(su, sv / a) * (1.0 + 1e-14));
    CHECK(naive_mse(su + gen::uniform(rng, 0.0, 1.0), sv, a) >= psi);
    const double rho = shrinkage_factor(su, sv, a);
    CHECK(rho >= 0.0);
    CHECK(rho <= 1.0);
  }
}

TEST_CASE("EBLUP endpoints and convex combination") {
  Rng rng(62);
  const Dataset d = gen::dataset(rng, gen::random_spec(rng));
  const ClusterSummaries cs = summarize(d);
  FixedEffects fe;
  fe.mu = 0.3;
  fe.beta = Eigen::VectorXd::Constant(d.dim(), -0.4);
  const Eigen::VectorXd synth = synthetic_part(cs, fe);
  const Eigen::VectorXd direct =
      synth + (cs.y_bar - (cs.x_bar * fe.beta).array().matrix() -
               Eigen::VectorXd::Constant(d.num_clusters(), fe.mu));

  VarianceComponents vc;
  vc.sigma2_v = 1.0;
  vc.sigma2_u = 0.0;
  const Prediction p0 = eblup(d, cs, fe, vc);
  CHECK((p0.theta_hat - synth).cwiseAbs().maxCoeff() == 0.0);
  CHECK(p0.rho.isZero());
  CHECK(p0.naive_mse.isZero());

  vc.sigma2_u = 1e12;
  vc.sigma2_v = 1e-12;
  const Prediction p1 = eblup(d, cs, fe, vc);
  CHECK((p1.theta_hat - direct).cwiseAbs().maxCoeff() < 1e-9);

  vc.sigma2_u = 0.8;
  vc.sigma2_v = 1.1;
  const Prediction p = eblup(d, cs, fe, vc);
  for (Index i = 0; i < d.num_clusters(); ++i) {
    const double expect = (1.0 - p.rho(i)) * synth(i) + p.rho(i) * direct(i);
    CHECK(p.theta_hat(i) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(p.naive_mse(i) > 0.0);
  }
}

TEST_CASE("zero fixed effects predict the cluster effect alone") {
  Rng rng(63);
  const Dataset d = gen::dataset(rng, gen::random_spec(rng));
  const ClusterSummaries cs = summarize(d);
  FixedEffects zero;
  zero.beta = Eigen::VectorXd::Zero(d.dim());
  VarianceComponents vc;
  vc.sigma2_u = 2.0;
  vc.sigma2_v = 0.5;
  const Prediction p = eblup(d, cs, zero, vc);
  for (Index i = 0; i < d.num_clusters(); ++i) {
    CHECK(p.theta_hat(i) == doctest::Approx(p.rho(i) * cs.y_bar(i)).epsilon(1e-14));
  }
}

TEST_CASE("full fit agrees with the dense oracle on random data") {
  Rng rng(64);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = gen::dataset(rng, gen::random_spec(rng));
    const FittedModel f = fit_model(d);
    const oracle::Fit ref = oracle::fit(d);
    const double scale = 1.0 + ref.theta_hat.cwiseAbs().maxCoeff();
    CHECK((f.prediction.theta_hat - ref.theta_hat).cwiseAbs().maxCoeff() < 1e-8 * scale);
    CHECK((f.prediction.rho - ref.rho).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((f.prediction.naive_mse - ref.naive).cwiseAbs().maxCoeff() <
          1e-8 * (1.0 + ref.naive.maxCoeff()));
  }
}
