#include "mmboot/model.hpp"

#include <cmath>
#include <unordered_map>

#include "mmboot/errors.hpp"

namespace mmboot {

Dataset Dataset::from_clusters(std::vector<Cluster> clusters) {
  const auto n = static_cast<Index>(clusters.size());
  if (n < 2) {
    fail(ErrorCode::insufficient_degrees_of_freedom,
         "at least 2 clusters are required, got " + std::to_string(n));
  }
  const Index r = clusters.front().x.cols();
  if (r < 1) fail(ErrorCode::dimension_mismatch, "covariate dimension must be at least 1");

  Index total = 0;
  for (const auto& c : clusters) {
    const Index ni = c.y.size();
    if (c.x.rows() != ni || c.s.size() != ni) {
      fail(ErrorCode::dimension_mismatch,
           "cluster '" + c.id + "': x, y and s must have the same length");
    }
    if (c.x.cols() != r) {
      fail(ErrorCode::dimension_mismatch, "cluster '" + c.id + "' has " +
                                              std::to_string(c.x.cols()) +
                                              " covariates, expected " + std::to_string(r));
    }
    if (ni < 2) {
      fail(ErrorCode::empty_cluster,
           "cluster '" + c.id + "' has " + std::to_string(ni) + " observation(s); need at least 2");
    }
    for (Index j = 0; j < ni; ++j) {
      if (!std::isfinite(c.s(j)) || c.s(j) <= 0.0) {
        fail(ErrorCode::non_positive_scale, "cluster '" + c.id + "' has a non-positive scale s");
      }
    }
    if (!c.x.allFinite() || !c.y.allFinite()) {
      fail(ErrorCode::non_finite_value, "cluster '" + c.id + "' contains non-finite values");
    }
    total += ni;
  }
  if (total - n <= r) {
    fail(ErrorCode::insufficient_degrees_of_freedom,
         "N - n = " + std::to_string(total - n) + " must exceed r = " + std::to_string(r));
  }

  auto design = std::make_shared<Design>();
  design->x.resize(total, r);
  design->s.resize(total);
  design->offsets.reserve(clusters.size() + 1);
  design->ids.reserve(clusters.size());
  Eigen::VectorXd y(total);

  Index row = 0;
  design->offsets.push_back(0);
  for (auto& c : clusters) {
    const Index ni = c.y.size();
    design->x.middleRows(row, ni) = c.x;
    design->s.segment(row, ni) = c.s;
    y.segment(row, ni) = c.y;
    row += ni;
    design->offsets.push_back(row);
    design->ids.push_back(std::move(c.id));
  }
  return Dataset(std::move(design), std::move(y));
}

Cluster Dataset::cluster(Index i) const {
  return Cluster{id(i), cluster_x(i), cluster_y(i), cluster_s(i)};
}

Dataset Dataset::with_responses(Eigen::VectorXd y) const {
  if (y.size() != num_observations()) {
    fail(ErrorCode::dimension_mismatch, "response vector has length " + std::to_string(y.size()) +
                                            ", expected " + std::to_string(num_observations()));
  }
  return Dataset(design_, std::move(y));
}

Dataset build_dataset(std::span<const Observation> rows) {
  if (rows.empty()) fail(ErrorCode::insufficient_degrees_of_freedom, "no observations");
  const Index r = rows.front().x.size();

  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<const Observation*>> groups;
  std::vector<std::string> order;
  for (const auto& row : rows) {
    if (row.x.size() != r) {
      fail(ErrorCode::dimension_mismatch, "observation in cluster '" + row.cluster + "' has " +
                                              std::to_string(row.x.size()) +
                                              " covariates, expected " + std::to_string(r));
    }
    auto [it, inserted] = index.try_emplace(row.cluster, groups.size());
    if (inserted) {
      groups.emplace_back();
      order.push_back(row.cluster);
    }
    groups[it->second].push_back(&row);
  }

  std::vector<Cluster> clusters;
  clusters.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto ni = static_cast<Index>(groups[g].size());
    Cluster c{order[g], Eigen::MatrixXd(ni, r), Eigen::VectorXd(ni), Eigen::VectorXd(ni)};
    for (Index j = 0; j < ni; ++j) {
      const Observation& o = *groups[g][static_cast<std::size_t>(j)];
      c.x.row(j) = o.x.transpose();
      c.y(j) = o.y;
      c.s(j) = o.s;
    }
    clusters.push_back(std::move(c));
  }
  return Dataset::from_clusters(std::move(clusters));
}

Eigen::VectorXd weighted_cluster_means(const Dataset& d, const Eigen::VectorXd& values) {
  const Index n = d.num_clusters();
  Eigen::VectorXd means(n);
  for (Index i = 0; i < n; ++i) {
    const auto w = d.cluster_s(i).array().square().inverse();
    means(i) = (w * values.segment(d.offset(i), d.cluster_size(i)).array()).sum() / w.sum();
  }
  return means;
}

ClusterSummaries summarize(const Dataset& d) {
  const Index n = d.num_clusters();
  const Index r = d.dim();
  ClusterSummaries cs{Eigen::VectorXd(n), Eigen::MatrixXd(n, r), Eigen::VectorXd(n),
                      Eigen::MatrixXd(n, r)};
  for (Index i = 0; i < n; ++i) {
    const Eigen::VectorXd w = d.cluster_s(i).array().square().inverse();
    const auto x = d.cluster_x(i);
    cs.a(i) = w.sum();
    cs.x_bar.row(i) = (w.transpose() * x) / cs.a(i);
    cs.y_bar(i) = w.dot(d.cluster_y(i)) / cs.a(i);
    cs.x_underline.row(i) = x.colwise().mean();
  }
  return cs;
}

}  // namespace mmboot
