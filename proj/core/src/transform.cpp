#include "mmboot/transform.hpp"

#include "mmboot/errors.hpp"

namespace mmboot {

Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) return 0;
  return (sv.array() > rel_tol * sv(0)).count();
}

std::vector<Index> last_observation_dropped(const Dataset& d) {
  std::vector<Index> dropped(static_cast<std::size_t>(d.num_clusters()));
  for (Index i = 0; i < d.num_clusters(); ++i) {
    dropped[static_cast<std::size_t>(i)] = d.cluster_size(i) - 1;
  }
  return dropped;
}

Eigen::MatrixXd centered_covariance_block(const Eigen::VectorXd& s, Index dropped) {
  const Index ni = s.size();
  const Eigen::VectorXd inv_s = s.cwiseInverse();
  const double a = inv_s.squaredNorm();
  Eigen::VectorXd kept(ni - 1);
  for (Index j = 0, k = 0; j < ni; ++j) {
    if (j != dropped) kept(k++) = inv_s(j);
  }
  Eigen::MatrixXd t = -kept * kept.transpose() / a;
  t.diagonal().array() += 1.0;
  return t;
}

Eigen::VectorXd centered_response(const Dataset& d, const Eigen::VectorXd& y_bar,
                                  const std::vector<Index>& dropped) {
  Eigen::VectorXd q(d.num_observations() - d.num_clusters());
  Index col = 0;
  for (Index i = 0; i < d.num_clusters(); ++i) {
    const auto y = d.cluster_y(i);
    const auto s = d.cluster_s(i);
    const Index skip = dropped[static_cast<std::size_t>(i)];
    for (Index j = 0; j < y.size(); ++j) {
      if (j != skip) q(col++) = (y(j) - y_bar(i)) / s(j);
    }
  }
  return q;
}

CenteredSystem center(const Dataset& d, const ClusterSummaries& cs) {
  return center(d, cs, last_observation_dropped(d));
}

CenteredSystem center(const Dataset& d, const ClusterSummaries& cs,
                      const std::vector<Index>& dropped) {
  const Index n = d.num_clusters();
  const Index r = d.dim();
  if (static_cast<Index>(dropped.size()) != n) {
    fail(ErrorCode::dimension_mismatch, "one dropped index per cluster is required");
  }

  CenteredSystem sys;
  sys.p.resize(r, d.num_observations() - n);
  sys.q = centered_response(d, cs.y_bar, dropped);
  sys.dropped_index = dropped;
  sys.t_blocks.reserve(static_cast<std::size_t>(n));
  sys.block_offsets.reserve(static_cast<std::size_t>(n) + 1);
  sys.block_offsets.push_back(0);

  // Whitened design L_i^-1 P_i' (T_i = L_i L_i') for the rank check.
  Eigen::MatrixXd whitened(sys.p.cols(), r);
  Index col = 0;
  for (Index i = 0; i < n; ++i) {
    const auto x = d.cluster_x(i);
    const auto s = d.cluster_s(i);
    const Index ni = x.rows();
    const Index skip = dropped[static_cast<std::size_t>(i)];
    if (skip < 0 || skip >= ni) {
      fail(ErrorCode::dimension_mismatch, "dropped index out of range in cluster '" + d.id(i) + "'");
    }
    const Index start = col;
    for (Index j = 0; j < ni; ++j) {
      if (j == skip) continue;
      sys.p.col(col++) = (x.row(j) - cs.x_bar.row(i)).transpose() / s(j);
    }

    Eigen::MatrixXd t = centered_covariance_block(s, skip);
    Eigen::LLT<Eigen::MatrixXd> llt(t);
    if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0.0)) {
      fail(ErrorCode::singular_block,
           "covariance block of cluster '" + d.id(i) + "' is not positive definite");
    }
    whitened.middleRows(start, ni - 1) =
        llt.matrixL().solve(sys.p.middleCols(start, ni - 1).transpose());
    sys.t_blocks.push_back(std::move(t));
    sys.block_offsets.push_back(col);
  }

  if (numerical_rank(whitened) < r) {
    fail(ErrorCode::rank_deficient,
         "within-cluster covariate variation does not span all " + std::to_string(r) +
             " covariate directions");
  }
  return sys;
}

UncenteredSystem uncenter(const Dataset& d) {
  const Index total = d.num_observations();
  const Index r = d.dim();
  UncenteredSystem sys;
  sys.r_aug = r + 1;
  sys.p_bar.resize(sys.r_aug, total);
  sys.q_bar = d.y().cwiseQuotient(d.s());
  const Eigen::VectorXd inv_s = d.s().cwiseInverse();
  sys.p_bar.row(0) = inv_s.transpose();
  sys.p_bar.bottomRows(r) = (d.x().array().colwise() * inv_s.array()).transpose();

  if (numerical_rank(sys.p_bar) < sys.r_aug) {
    fail(ErrorCode::rank_deficient, "design with intercept is not of full rank " +
                                        std::to_string(sys.r_aug));
  }
  return sys;
}

}  // namespace mmboot
