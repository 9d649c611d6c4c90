#pragma once

#include <vector>

#include "mmboot/gls.hpp"
#include "mmboot/model.hpp"
#include "mmboot/moments.hpp"
#include "mmboot/predictor.hpp"
#include "mmboot/transform.hpp"
#include "mmboot/variance.hpp"

namespace mmboot {

/// Everything estimated from one dataset.
struct FittedModel {
  ClusterSummaries summaries;
  VarianceComponents variance;
  FixedEffects fixed;
  FourthMoments moments;  // zero when not requested
  Prediction prediction;
};

/// The full estimation pipeline (variance components, GLS fixed effects,
/// EBLUP, optionally fourth moments) bound to one design. Design-only work
/// (block factorizations, rank checks, K, GLS design sums) happens in the
/// constructor; fit() can then be called on any response vector that shares
/// the design, which is what bootstrap refits need.
class Estimator {
 public:
  /// Errors: SingularBlock, RankDeficient, NonPositiveK.
  explicit Estimator(const Dataset& design, Ridge ridge = {});

  /// data must share the design passed to the constructor.
  FittedModel fit(const Dataset& data, bool with_fourth_moments = true) const;

  const Dataset& design() const { return design_; }
  const Ridge& ridge() const { return ridge_; }
  const std::vector<Index>& dropped() const { return dropped_; }

 private:
  struct Systems;
  Estimator(const Dataset& design, Ridge ridge, Systems&& systems);

  Dataset design_;
  Ridge ridge_;
  ClusterSummaries design_summaries_;
  std::vector<Index> dropped_;
  WithinSolver within_;
  BetweenSolver between_;
  GlsSolver gls_;
};

/// One-shot convenience: Estimator(d, ridge).fit(d, true).
FittedModel fit_model(const Dataset& d, const Ridge& ridge = {});

}  // namespace mmboot
