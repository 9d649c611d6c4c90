#include "mmboot/pipeline.hpp"

#include "mmboot/errors.hpp"

namespace mmboot {

struct Estimator::Systems {
  ClusterSummaries summaries;
  CenteredSystem centered;
  UncenteredSystem uncentered;

  explicit Systems(const Dataset& d)
      : summaries(summarize(d)), centered(center(d, summaries)), uncentered(uncenter(d)) {}
};

Estimator::Estimator(const Dataset& design, Ridge ridge)
    : Estimator(design, ridge, Systems(design)) {}

Estimator::Estimator(const Dataset& design, Ridge ridge, Systems&& systems)
    : design_(design),
      ridge_(ridge),
      design_summaries_(std::move(systems.summaries)),
      dropped_(systems.centered.dropped_index),
      within_(systems.centered),
      between_(systems.uncentered, design),
      gls_(design) {
  ridge_.validate();
}

FittedModel Estimator::fit(const Dataset& data, bool with_fourth_moments) const {
  if (!data.same_design(design_)) {
    fail(ErrorCode::invalid_argument, "dataset does not share the estimator's design");
  }
  const Index n = data.num_clusters();
  const Index total = data.num_observations();

  FittedModel fm;
  fm.summaries = design_summaries_;
  fm.summaries.y_bar = weighted_cluster_means(data, data.y());

  const Eigen::VectorXd q = centered_response(data, fm.summaries.y_bar, dropped_);
  const auto v = sigma2_v_from_sse(within_.solve(q).sse, n, total, data.dim(), ridge_);
  const Eigen::VectorXd q_bar = data.y().cwiseQuotient(data.s());
  const auto u = sigma2_u_from_sse(between_.sse(q_bar), between_.k(), total, between_.r_aug(),
                                   v.sigma2_v);
  fm.variance = {u.sigma2_u, v.sigma2_v, v.sse1, u.sse2, u.k};

  fm.fixed = gls_.solve(data, fm.variance.sigma2_u, fm.variance.sigma2_v);
  fm.prediction = eblup(data, fm.summaries, fm.fixed, fm.variance);
  if (with_fourth_moments) fm.moments = estimate_fourth_moments(data, fm.fixed, fm.variance);
  return fm;
}

FittedModel fit_model(const Dataset& d, const Ridge& ridge) { return Estimator(d, ridge).fit(d); }

}  // namespace mmboot
