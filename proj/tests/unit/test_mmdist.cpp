#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "mmboot/errors.hpp"
#include "mmboot/mmdist.hpp"

using namespace mmboot;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mmboot::Error");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("three-point parameters") {
  const auto d = MatchedDistribution::three_point(1.0, 3.0);
  CHECK(d.p() == doctest::Approx(1.0 / 3.0));
  CHECK(d.atom() == doctest::Approx(std::sqrt(3.0)));
  CHECK(2.0 * (d.p() / 2.0) * std::pow(d.atom(), 4) == doctest::Approx(3.0));

  const auto rademacher = MatchedDistribution::three_point(1.0, 1.0);
  CHECK(rademacher.p() == 1.0);
  CHECK(rademacher.atom() == 1.0);

  const auto zero = MatchedDistribution::three_point(0.0, 5.0);
  CHECK(zero.is_point_mass());
  Rng rng(1);
  CHECK(sample(zero, rng, 1000).isZero());
  CHECK(code_of([] { MatchedDistribution::three_point(1.0, 0.5); }) ==
        ErrorCode::moment_infeasible);
  CHECK(code_of([] { MatchedDistribution::three_point(-1.0, 2.0); }) ==
        ErrorCode::moment_infeasible);
}

TEST_CASE("three-point atoms carry the exact moments") {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const double z2 = gen::uniform(rng, 1e-3, 10.0);
    const double z4 = z2 * z2 * gen::uniform(rng, 1.0, 50.0);
    const auto d = MatchedDistribution::three_point(z2, z4);
    const double half = d.p() / 2.0;
    const double m2 = 2.0 * half * std::pow(d.atom(), 2);
    const double m4 = 2.0 * half * std::pow(d.atom(), 4);
    CHECK(d.p() > 0.0);
    CHECK(d.p() <= 1.0);
    CHECK(std::abs(m2 - z2) <= 1e-12 * z2);
    CHECK(std::abs(m4 - z4) <= 1e-12 * z4);
  }
}

TEST_CASE("three-point sampling moments at 10^6 draws") {
  const auto d = MatchedDistribution::three_point(1.0, 3.0);
  Rng rng(3);
  const Eigen::ArrayXd x = sample(d, rng, 1000000).array();
  CHECK(std::abs(x.mean()) < 0.004);
  CHECK(std::abs(x.square().mean() - 1.0) < 0.01);
  CHECK(std::abs(x.pow(4).mean() - 3.0) < 0.05);
  for (const double v : x) {
    CHECK((v == 0.0 || std::abs(std::abs(v) - std::sqrt(3.0)) < 1e-15));
    if (!(v == 0.0 || std::abs(std::abs(v) - std::sqrt(3.0)) < 1e-15)) break;
  }
}

TEST_CASE("student-t parameters") {
  const auto d = MatchedDistribution::student_t(1.0, 6.0);
  CHECK(d.dof() == doctest::Approx(6.0));
  CHECK(d.scale() == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(d.scale() == doctest::Approx(0.8164966).epsilon(1e-7));

  const auto e = MatchedDistribution::student_t(2.0, 24.0);
  CHECK(e.dof() == doctest::Approx(6.0));
  CHECK(e.scale() == doctest::Approx(std::sqrt(2.0 * 2.0 / 3.0)));

  CHECK(student_t_dof_for_kurtosis(4.0) == doctest::Approx(10.0));
  CHECK(student_t_dof_for_kurtosis(10.0) == doctest::Approx(34.0 / 7.0));
  CHECK(code_of([] { MatchedDistribution::student_t(1.0, 3.0); }) ==
        ErrorCode::kurtosis_not_heavy);
  CHECK(code_of([] { MatchedDistribution::student_t(1.0, 2.0); }) ==
        ErrorCode::kurtosis_not_heavy);
}

TEST_CASE("student-t kurtosis inversion round-trips") {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const double kappa = gen::uniform(rng, 3.001, 100.0);
    const double r = student_t_dof_for_kurtosis(kappa);
    CHECK(r > 4.0);
    CHECK(3.0 * (r - 2.0) / (r - 4.0) == doctest::Approx(kappa).epsilon(1e-10));
  }
}

TEST_CASE("student-t sample variance at 10^6 draws") {
  const auto d = MatchedDistribution::student_t(1.0, 4.0);
  Rng rng(5);
  const Eigen::ArrayXd x = sample(d, rng, 1000000).array();
  const Eigen::ArrayXd sq = x.square();
  const double se = std::sqrt((sq - sq.mean()).square().mean() / static_cast<double>(x.size()));
  CHECK(std::abs(sq.mean() - 1.0) < 3.0 * se);
}

TEST_CASE("family selection falls back to three-point for light tails") {
  bool fell_back = false;
  const auto d = MatchedDistribution::make(Family::student_t, 1.0, 2.0, &fell_back);
  CHECK(fell_back);
  CHECK(d.family() == Family::three_point);
  CHECK(d.p() == doctest::Approx(0.5));

  fell_back = true;
  const auto t = MatchedDistribution::make(Family::student_t, 1.0, 5.0, &fell_back);
  CHECK_FALSE(fell_back);
  CHECK(t.family() == Family::student_t);

  const auto z = MatchedDistribution::make(Family::student_t, 0.0, 0.0, &fell_back);
  CHECK(z.is_point_mass());
  CHECK_FALSE(fell_back);
}

TEST_CASE("sampling is deterministic given the stream") {
  for (const Family f : {Family::three_point, Family::student_t}) {
    const auto d = MatchedDistribution::make(f, 1.3, 1.3 * 1.3 * 5.0);
    Rng a = make_stream(42, Stream::sampler);
    Rng b = make_stream(42, Stream::sampler);
    CHECK(sample(d, a, 500) == sample(d, b, 500));
  }
}

TEST_CASE("family names") {
  CHECK(to_string(Family::three_point) == "three-point");
  CHECK(to_string(Family::student_t) == "student-t");
  CHECK(parse_family("three-point") == Family::three_point);
  CHECK(parse_family("student_t") == Family::student_t);
  CHECK_THROWS_AS(parse_family("gaussian"), Error);
}
