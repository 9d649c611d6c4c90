#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mmboot/model.hpp"

namespace mmboot {

/// Within-cluster (centered) regression q = P' beta + e with cov(e) = T sigma_V^2.
///
/// One observation per cluster is dropped to remove the linear dependence
/// among the centered residuals, so cluster i contributes n_i - 1 columns.
struct CenteredSystem {
  Eigen::MatrixXd p;                       // r x (N - n)
  Eigen::VectorXd q;                       // N - n
  std::vector<Eigen::MatrixXd> t_blocks;   // (n_i - 1) x (n_i - 1) each
  std::vector<Index> dropped_index;        // within-cluster index of the dropped row
  std::vector<Index> block_offsets;        // n + 1 column offsets into p / q

  Index rows() const { return q.size(); }
};

/// Full-data (uncentered) regression q_bar = P_bar' (mu, beta')' + e_bar.
/// Column j of cluster i of P_bar is s_ij^-1 (1, X_ij')'.
struct UncenteredSystem {
  Eigen::MatrixXd p_bar;  // r_aug x N
  Eigen::VectorXd q_bar;  // N
  Index r_aug = 0;        // r + 1 (intercept folded in)
};

/// Drops the last observation of every cluster.
CenteredSystem center(const Dataset& d, const ClusterSummaries& cs);

/// dropped[i] selects which observation of cluster i is removed.
/// Errors: SingularBlock, RankDeficient.
CenteredSystem center(const Dataset& d, const ClusterSummaries& cs,
                      const std::vector<Index>& dropped);

/// Centered responses q_ij = s_ij^-1 (Y_ij - Ybar_i) for the retained rows.
/// y_bar must be the precision-weighted cluster means of d.y().
Eigen::VectorXd centered_response(const Dataset& d, const Eigen::VectorXd& y_bar,
                                  const std::vector<Index>& dropped);

/// Exact covariance factor of the retained centered errors of one cluster:
///   t_{j1 j2} = delta_{j1 j2} - s_j1^-1 s_j2^-1 / a_i.
Eigen::MatrixXd centered_covariance_block(const Eigen::VectorXd& s, Index dropped);

/// Errors: RankDeficient.
UncenteredSystem uncenter(const Dataset& d);

/// Number of singular values above rel_tol times the largest one.
Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

std::vector<Index> last_observation_dropped(const Dataset& d);

}  // namespace mmboot
