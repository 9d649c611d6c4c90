#include "mmboot/mmdist.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mmboot/errors.hpp"

namespace mmboot {
namespace {

// Relative slack on z4 >= z2^2 so that truncated estimates sitting exactly on
// the boundary are not rejected after rounding.
constexpr double kBoundarySlack = 1e-12;

void check_moments(double z2, double z4) {
  if (!std::isfinite(z2) || !std::isfinite(z4) || z2 < 0.0) {
    fail(ErrorCode::moment_infeasible, "need finite z2 >= 0, got z2 = " + std::to_string(z2));
  }
  if (z4 < z2 * z2 * (1.0 - kBoundarySlack)) {
    fail(ErrorCode::moment_infeasible, "z4 = " + std::to_string(z4) + " is below z2^2 = " +
                                           std::to_string(z2 * z2));
  }
}

}  // namespace

std::string_view to_string(Family f) noexcept {
  return f == Family::three_point ? "three-point" : "student-t";
}

Family parse_family(std::string_view name) {
  if (name == "three-point" || name == "three_point" || name == "3pt") return Family::three_point;
  if (name == "student-t" || name == "student_t" || name == "t") return Family::student_t;
  fail(ErrorCode::invalid_argument, "unknown family '" + std::string(name) +
                                        "' (expected three-point or student-t)");
}

double student_t_dof_for_kurtosis(double kappa) {
  if (!(kappa > 3.0)) {
    fail(ErrorCode::kurtosis_not_heavy,
         "Student's t needs kurtosis above 3, got " + std::to_string(kappa));
  }
  return (4.0 * kappa - 6.0) / (kappa - 3.0);
}

MatchedDistribution MatchedDistribution::point_mass() { return MatchedDistribution(); }

MatchedDistribution MatchedDistribution::three_point(double z2, double z4) {
  check_moments(z2, z4);
  if (z2 == 0.0) return point_mass();
  MatchedDistribution d;
  d.family_ = Family::three_point;
  d.z2_ = z2;
  d.z4_ = z4;
  d.p_ = std::min(1.0, z2 * z2 / z4);
  d.atom_ = std::sqrt(z2 / d.p_);
  return d;
}

MatchedDistribution MatchedDistribution::student_t(double z2, double z4) {
  check_moments(z2, z4);
  if (!(z2 > 0.0)) fail(ErrorCode::moment_infeasible, "Student's t needs z2 > 0");
  MatchedDistribution d;
  d.family_ = Family::student_t;
  d.z2_ = z2;
  d.z4_ = z4;
  d.dof_ = student_t_dof_for_kurtosis(z4 / (z2 * z2));
  d.scale_ = std::sqrt(z2 * (d.dof_ - 2.0) / d.dof_);
  return d;
}

MatchedDistribution MatchedDistribution::make(Family family, double z2, double z4,
                                              bool* fell_back) {
  if (fell_back) *fell_back = false;
  check_moments(z2, z4);
  if (z2 == 0.0) return point_mass();
  if (family == Family::student_t) {
    if (z4 / (z2 * z2) > 3.0) return student_t(z2, z4);
    if (fell_back) *fell_back = true;
  }
  return three_point(z2, z4);
}

double draw_student_t(Rng& rng, double dof) {
  std::normal_distribution<double> normal;
  std::gamma_distribution<double> chi2(0.5 * dof, 2.0);
  const double z = normal(rng);
  return z / std::sqrt(chi2(rng) / dof);
}

double MatchedDistribution::draw(Rng& rng) const {
  if (is_point_mass()) return 0.0;
  if (family_ == Family::three_point) {
    const double u = uniform01(rng);
    if (u < 0.5 * p_) return atom_;
    if (u < p_) return -atom_;
    return 0.0;
  }
  return scale_ * draw_student_t(rng, dof_);
}

void MatchedDistribution::sample(Rng& rng, std::span<double> out) const {
  if (is_point_mass()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  if (family_ == Family::three_point) {
    for (double& v : out) {
      const double u = uniform01(rng);
      v = u < 0.5 * p_ ? atom_ : (u < p_ ? -atom_ : 0.0);
    }
    return;
  }
  std::normal_distribution<double> normal;
  std::gamma_distribution<double> chi2(0.5 * dof_, 2.0);
  for (double& v : out) {
    const double z = normal(rng);
    v = scale_ * z / std::sqrt(chi2(rng) / dof_);
  }
}

Eigen::VectorXd sample(const MatchedDistribution& dist, Rng& rng, Index count) {
  Eigen::VectorXd out(count);
  dist.sample(rng, std::span<double>(out.data(), static_cast<std::size_t>(count)));
  return out;
}

}  // namespace mmboot
