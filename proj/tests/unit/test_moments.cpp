#include <cmath>
#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "mmboot/mmdist.hpp"
#include "mmboot/moments.hpp"
#include "mmboot/pipeline.hpp"
#include "mmboot/simulate.hpp"
#include "oracle.hpp"

using namespace mmboot;

namespace {

Dataset balanced_design(std::uint64_t seed, Index n) {
  Scenario sc;
  sc.n = n;
  Rng rng(seed);
  return make_design(sc, rng);
}

/// Responses X beta + U + V with U, V drawn from the given laws.
Dataset with_errors(const Dataset& design, const MatchedDistribution& u_law,
                    const MatchedDistribution& v_law, Rng& rng) {
  Eigen::VectorXd y = design.x().col(0);
  for (Index i = 0; i < design.num_clusters(); ++i) {
    const double u = u_law.draw(rng);
    for (Index j = 0; j < design.cluster_size(i); ++j) {
      const Index row = design.offset(i) + j;
      y(row) += u + design.s()(row) * v_law.draw(rng);
    }
  }
  return design.with_responses(std::move(y));
}

struct Band {
  double mean;
  double se;
};

template <class F>
Band monte_carlo(int reps, F&& f) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int k = 0; k < reps; ++k) {
    const double v = f();
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / reps;
  return {mean, std::sqrt((sum_sq / reps - mean * mean) / reps)};
}

}  // namespace

TEST_CASE("pair contrast moment agrees with the ordered double loop") {
  Rng rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = gen::dataset(rng, gen::random_spec(rng));
    Eigen::VectorXd resid(d.num_observations());
    for (Index k = 0; k < resid.size(); ++k) resid(k) = gen::uniform(rng, -2, 2);
    const double s = gen::uniform(rng, -2, 2);
    const double t = gen::uniform(rng, -2, 2);
    for (const int k : {1, 2, 3, 4}) {
      const double ref = oracle::pair_moment(d, resid, k, s, t);
      CHECK(pair_contrast_moment(d, resid, k, s, t) ==
            doctest::Approx(ref).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("first pair moment is (s + t) times the mean residual on balanced designs") {
  const Dataset design = balanced_design(3, 12);
  Rng rng(72);
  const Dataset d = gen::redraw(rng, design, 0.0, 1.0, 1.0, 1.0);
  const FittedModel fit = fit_model(d);
  const Eigen::VectorXd r = residuals(d, fit.fixed);
  CHECK(pair_contrast_moment(d, fit.fixed, 1, 0.7, 1.9) ==
        doctest::Approx(2.6 * r.mean()).epsilon(1e-12).scale(1.0));
  CHECK(std::abs(pair_contrast_moment(d, fit.fixed, 1, 1.0, 1.0)) < 0.5);
}

TEST_CASE("pair design constants") {
  const Dataset d = balanced_design(4, 10);
  const PairDesignConstants c = pair_design_constants(d);
  CHECK(c.a4 == doctest::Approx(1.0));
  CHECK(c.c_pair == doctest::Approx(1.0));
  CHECK(c.sum_s2 == 30.0);
  CHECK(c.sum_s4 == 30.0);

  Rng rng(73);
  gen::DatasetSpec spec;
  spec.min_size = 2;
  spec.max_size = 6;
  spec.s_low = 0.5;
  spec.s_high = 2.0;
  const Dataset u = gen::dataset(rng, spec);
  double s4_pair = 0.0;
  double s22_pair = 0.0;
  double pairs = 0.0;
  for (Index i = 0; i < u.num_clusters(); ++i) {
    for (Index a = 0; a < u.cluster_size(i); ++a) {
      for (Index b = 0; b < u.cluster_size(i); ++b) {
        if (a == b) continue;
        const double sa = u.cluster_s(i)(a);
        const double sb = u.cluster_s(i)(b);
        s4_pair += 0.5 * (std::pow(sa, 4) + std::pow(sb, 4));
        s22_pair += sa * sa * sb * sb;
        pairs += 1.0;
      }
    }
  }
  const PairDesignConstants cu = pair_design_constants(u);
  CHECK(cu.a4 == doctest::Approx(s4_pair / pairs).epsilon(1e-12));
  CHECK(cu.c_pair == doctest::Approx(s22_pair / pairs).epsilon(1e-12));
}

TEST_CASE("fourth moments agree with the dense oracle") {
  Rng rng(74);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = gen::dataset(rng, gen::random_spec(rng));
    const FittedModel f = fit_model(d);
    const oracle::Fit ref = oracle::fit(d);
    CHECK(f.moments.gamma_v == doctest::Approx(ref.gamma_v).epsilon(1e-8));
    CHECK(f.moments.gamma_u == doctest::Approx(ref.gamma_u).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("truncation branches") {
  const Dataset d = balanced_design(5, 6);
  const Eigen::VectorXd tiny = Eigen::VectorXd::Constant(d.num_observations(), 1e-4);
  CHECK(estimate_gamma_v(d, tiny, 2.0) == 4.0);
  CHECK(estimate_gamma_u(d, tiny, 0.0, 1e-3, 1e-6) == 0.0);
  CHECK(estimate_gamma_u(d, tiny, 0.5, 1.0, 3.0) == 0.25);

  Rng rng(75);
  for (int trial = 0; trial < 200; ++trial) {
    gen::DatasetSpec spec = gen::random_spec(rng);
    if (trial % 3 == 0) spec.sigma_u = 0.0;
    const FittedModel f = fit_model(gen::dataset(rng, spec));
    CHECK(f.moments.gamma_v >= f.variance.sigma2_v * f.variance.sigma2_v);
    CHECK(f.moments.gamma_u >= f.variance.sigma2_u * f.variance.sigma2_u);
  }
}

TEST_CASE("Monte Carlo: squared contrast of exact errors averages 2 sigma_V^2") {
  const Dataset d = balanced_design(6, 50);
  Rng rng(76);
  std::normal_distribution<double> z;
  const Band b = monte_carlo(400, [&] {
    Eigen::VectorXd e(d.num_observations());
    for (Index i = 0; i < d.num_clusters(); ++i) {
      const double u = z(rng);
      for (Index j = 0; j < 3; ++j) e(d.offset(i) + j) = u + 0.7 * z(rng);
    }
    return pair_contrast_moment(d, e, 2, 1.0, -1.0);
  });
  CHECK(std::abs(b.mean - 2.0 * 0.49) < 3.0 * b.se);
}

TEST_CASE("Monte Carlo: normal errors give gamma estimates near 3") {
  const Dataset design = balanced_design(7, 200);
  const Estimator est(design);
  Rng rng(77);
  double sum_v = 0.0;
  double sum_u = 0.0;
  const int reps = 500;
  for (int k = 0; k < reps; ++k) {
    const FittedModel f = est.fit(gen::redraw(rng, design, 0.0, 1.0, 1.0, 1.0));
    sum_v += f.moments.gamma_v;
    sum_u += f.moments.gamma_u;
  }
  CHECK(sum_v / reps == doctest::Approx(3.0).epsilon(0.2 / 3.0));
  CHECK(sum_u / reps == doctest::Approx(3.0).epsilon(0.3 / 3.0));
}

TEST_CASE("Monte Carlo: three-point V with p = 1/3 gives gamma_V near 3") {
  const Dataset design = balanced_design(8, 200);
  const Estimator est(design);
  const MatchedDistribution tp = MatchedDistribution::three_point(1.0, 3.0);
  Rng rng(78);
  const Band b =
      monte_carlo(500, [&] { return est.fit(with_errors(design, tp, tp, rng)).moments.gamma_v; });
  CHECK(b.mean == doctest::Approx(3.0).epsilon(0.2 / 3.0));
}

TEST_CASE("Monte Carlo: gamma_U is unbiased when exact errors replace residuals") {
  // E(U + sV)^4 = gamma_U + 6 s^2 sigma_U^2 sigma_V^2 + s^4 gamma_V
  Rng rng(79);
  gen::DatasetSpec spec;
  spec.clusters = 40;
  spec.min_size = 2;
  spec.max_size = 5;
  spec.s_low = 0.5;
  spec.s_high = 1.5;
  const Dataset d = gen::dataset(rng, spec);
  const MatchedDistribution u_law = MatchedDistribution::three_point(1.2, 1.2 * 1.2 * 4.0);
  const MatchedDistribution v_law = MatchedDistribution::student_t(0.8, 0.8 * 0.8 * 6.0);
  const double gamma_u = u_law.z4();
  const Band b = monte_carlo(20000, [&] {
    Eigen::VectorXd e(d.num_observations());
    for (Index i = 0; i < d.num_clusters(); ++i) {
      const double u = u_law.draw(rng);
      for (Index j = 0; j < d.cluster_size(i); ++j) {
        const Index row = d.offset(i) + j;
        e(row) = u + d.s()(row) * v_law.draw(rng);
      }
    }
    const double r4 = e.array().pow(4).sum();
    const PairDesignConstants c = pair_design_constants(d);
    return (r4 - 6.0 * 1.2 * 0.8 * c.sum_s2 - v_law.z4() * c.sum_s4) /
           static_cast<double>(d.num_observations());
  });
  CHECK(std::abs(b.mean - gamma_u) < 3.0 * b.se);
}

TEST_CASE("Monte Carlo: fourth-moment RMSE roughly halves from n = 80 to n = 320") {
  auto rmse = [](Index n, std::uint64_t seed) {
    const Dataset design = balanced_design(seed, n);
    const Estimator est(design);
    Rng rng(seed + 1);
    double sq = 0.0;
    const int reps = 400;
    for (int k = 0; k < reps; ++k) {
      const FittedModel f = est.fit(gen::redraw(rng, design, 0.0, 1.0, 1.0, 1.0));
      sq += std::pow(f.moments.gamma_u - 3.0, 2) + std::pow(f.moments.gamma_v - 3.0, 2);
    }
    return std::sqrt(sq / reps);
  };
  const double small = rmse(80, 90);
  const double large = rmse(320, 91);
  CHECK(large <= 0.5 * small * 1.25);
}
