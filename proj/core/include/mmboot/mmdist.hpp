#pragma once

#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "mmboot/model.hpp"
#include "mmboot/rng.hpp"

namespace mmboot {

enum class Family { three_point, student_t };

std::string_view to_string(Family f) noexcept;
/// Accepts "three-point"/"three_point"/"3pt" and "student-t"/"student_t"/"t".
Family parse_family(std::string_view name);

/// A zero-mean law with prescribed variance z2 and fourth moment z4.
///
/// three_point: P(Z = 0) = 1 - p, P(Z = +-sqrt(z2 / p)) = p / 2, p = z2^2 / z4.
/// student_t:   scale * t_dof with kurtosis z4 / z2^2 = 3 (dof - 2) / (dof - 4).
/// z2 == 0 is the point mass at zero regardless of family.
class MatchedDistribution {
 public:
  /// Errors: MomentInfeasible (z2 < 0 or z4 < z2^2).
  static MatchedDistribution three_point(double z2, double z4);
  /// Errors: MomentInfeasible, KurtosisNotHeavy (z4 / z2^2 <= 3).
  static MatchedDistribution student_t(double z2, double z4);
  static MatchedDistribution point_mass();

  /// Family selection for the bootstrap: student_t falls back to
  /// three_point when the kurtosis is not above 3; *fell_back reports it.
  static MatchedDistribution make(Family family, double z2, double z4, bool* fell_back = nullptr);

  Family family() const { return family_; }
  bool is_point_mass() const { return z2_ == 0.0; }
  double z2() const { return z2_; }
  double z4() const { return z4_; }

  double p() const { return p_; }          // three_point only
  double atom() const { return atom_; }    // three_point: sqrt(z2 / p)
  double dof() const { return dof_; }      // student_t only
  double scale() const { return scale_; }  // student_t only

  double draw(Rng& rng) const;
  void sample(Rng& rng, std::span<double> out) const;

 private:
  MatchedDistribution() = default;

  Family family_ = Family::three_point;
  double z2_ = 0.0;
  double z4_ = 0.0;
  double p_ = 1.0;
  double atom_ = 0.0;
  double dof_ = 0.0;
  double scale_ = 0.0;
};

/// count i.i.d. draws; deterministic given the stream state.
Eigen::VectorXd sample(const MatchedDistribution& dist, Rng& rng, Index count);

/// Degrees of freedom solving kappa = 3 (r - 2) / (r - 4), kappa > 3.
double student_t_dof_for_kurtosis(double kappa);

/// chi-square(dof) scaled normal ratio; dof need not be an integer.
double draw_student_t(Rng& rng, double dof);

}  // namespace mmboot
