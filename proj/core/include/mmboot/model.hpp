#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mmboot {

using Eigen::Index;

/// One cluster of the nested-error regression model
///   Y_ij = mu + X_ij' beta + U_i + s_ij V_ij.
struct Cluster {
  std::string id;
  Eigen::MatrixXd x;  // n_i x r, row j is X_ij'
  Eigen::VectorXd y;
  Eigen::VectorXd s;  // known scale factors, all > 0
};

/// One CSV row before grouping.
struct Observation {
  std::string cluster;
  Eigen::VectorXd x;
  double y = 0.0;
  double s = 1.0;
};

/// Clustered observations with ragged cluster sizes.
///
/// The design (ids, covariates, scales, cluster boundaries) is immutable and
/// shared between copies; only the response vector is owned per instance, so
/// bootstrap worlds on the same design are cheap to create with
/// with_responses().
class Dataset {
 public:
  /// Validates and flattens. Cluster order is preserved.
  static Dataset from_clusters(std::vector<Cluster> clusters);

  Index num_clusters() const { return static_cast<Index>(design_->ids.size()); }
  Index num_observations() const { return design_->x.rows(); }
  Index dim() const { return design_->x.cols(); }

  Index cluster_size(Index i) const { return offset(i + 1) - offset(i); }
  Index offset(Index i) const { return design_->offsets[static_cast<std::size_t>(i)]; }
  const std::string& id(Index i) const { return design_->ids[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& ids() const { return design_->ids; }

  /// N x r, rows grouped by cluster.
  const Eigen::MatrixXd& x() const { return design_->x; }
  const Eigen::VectorXd& s() const { return design_->s; }
  const Eigen::VectorXd& y() const { return y_; }

  auto cluster_x(Index i) const { return design_->x.middleRows(offset(i), cluster_size(i)); }
  auto cluster_s(Index i) const { return design_->s.segment(offset(i), cluster_size(i)); }
  auto cluster_y(Index i) const { return y_.segment(offset(i), cluster_size(i)); }

  Cluster cluster(Index i) const;

  /// Same design, new responses (length N, cluster-grouped order).
  Dataset with_responses(Eigen::VectorXd y) const;
  bool same_design(const Dataset& other) const { return design_ == other.design_; }

 private:
  struct Design {
    std::vector<std::string> ids;
    Eigen::MatrixXd x;
    Eigen::VectorXd s;
    std::vector<Index> offsets;  // n + 1 entries
  };

  Dataset(std::shared_ptr<const Design> design, Eigen::VectorXd y)
      : design_(std::move(design)), y_(std::move(y)) {}

  std::shared_ptr<const Design> design_;
  Eigen::VectorXd y_;
};

/// Groups rows by cluster id in first-appearance order and validates.
/// Errors: EmptyCluster, DimensionMismatch, NonPositiveScale,
/// InsufficientDegreesOfFreedom.
Dataset build_dataset(std::span<const Observation> rows);

/// Per-cluster precision-weighted summaries.
struct ClusterSummaries {
  Eigen::VectorXd a;              // a_i = sum_j s_ij^-2
  Eigen::MatrixXd x_bar;          // n x r, a_i^-1 sum_j s_ij^-2 X_ij
  Eigen::VectorXd y_bar;          // a_i^-1 sum_j s_ij^-2 Y_ij
  Eigen::MatrixXd x_underline;    // n x r, unweighted covariate mean
};

ClusterSummaries summarize(const Dataset& d);

/// Precision-weighted cluster means of an arbitrary response vector on the
/// design of d.
Eigen::VectorXd weighted_cluster_means(const Dataset& d, const Eigen::VectorXd& values);

}  // namespace mmboot
