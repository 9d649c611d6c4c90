#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mmboot/mspe.hpp"
#include "mmboot/rng.hpp"

namespace mmboot {

/// Error laws of the simulation study. Draws are centered to mean zero and
/// scaled to the requested variance using analytic constants.
enum class ErrorLaw { normal, sqrt_chi2_5, chi2_5, neg_chi2_5, chi2_10, exponential, t6, logistic };

std::string_view to_string(ErrorLaw law) noexcept;
double law_raw_mean(ErrorLaw law);
double law_raw_variance(ErrorLaw law);

void draw_error(ErrorLaw law, double variance, Rng& rng, std::span<double> out);
Eigen::VectorXd draw_error(ErrorLaw law, double variance, Rng& rng, Index count);

enum class ModelKind { m1 = 1, m2, m3, m4, m5, m6, m7, m8 };

/// (U, V) error-law pair:
///   M1 normal, M2 sqrt(chi2_5), M3 chi2_5, M4 chi2_10, M5 exponential,
///   M6 U chi2_5 / V -chi2_5, M7 t_6, M8 logistic.
struct ErrorModel {
  ModelKind kind = ModelKind::m1;

  ErrorLaw u_law() const;
  ErrorLaw v_law() const;
  std::string_view name() const;         // "m1" .. "m8"
  std::string_view description() const;  // "normal", "chi2_5_neg_pair", ...

  /// Accepts "m1".."m8" (any case) or the description names.
  static ErrorModel parse(std::string_view text);
  static std::array<ErrorModel, 8> all();
};

struct Scenario {
  Index n = 60;
  Index cluster_size = 3;
  double mu = 0.0;
  double beta = 1.0;
  double s = 1.0;
  double sigma2_u = 1.0;
  double sigma2_v = 1.0;
  double x_low = 0.5;
  double x_high = 1.0;

  /// ratio = sigma_U^2 / sigma_V^2 in {1/2, 1, 2} with max(sigma_U^2, sigma_V^2) = 1.
  /// Errors: InvalidArgument for any other ratio.
  static Scenario standard(Index n, double ratio);

  double ratio() const { return sigma2_u / sigma2_v; }
  void validate() const;
};

/// Covariates X_ij ~ Uniform[x_low, x_high], r = 1, s_ij = s; responses zero.
/// Cluster ids are "1".."n".
Dataset make_design(const Scenario& sc, Rng& rng);

struct SimulatedSample {
  Dataset data;
  Eigen::VectorXd theta;  // mu + Xunderline_i beta + U_i
};

/// Draws U for every cluster, then V for every observation.
SimulatedSample simulate_sample(const Dataset& design, const Scenario& sc, const ErrorModel& model,
                                Rng& rng);

/// Per-cluster average of (Theta_hat_i - Theta_i)^2 over replicates.
/// The design is drawn once from (seed, study_design) and held fixed;
/// replicate k draws its errors from (seed, study_data, k).
Eigen::VectorXd run_truth(const Scenario& sc, const ErrorModel& model, Index replicates,
                          std::uint64_t seed, const Ridge& ridge = {}, unsigned jobs = 1);

struct EstimatorMetrics {
  Eigen::VectorXd rb;  // (mean estimate_i - SMSE_i) / SMSE_i
  Eigen::VectorXd cv;  // sqrt(mean (estimate_i - SMSE_i)^2) / SMSE_i
  double rb_median = 0.0;
  double rb_mean = 0.0;
  double rb_abs_median = 0.0;
  double rb_abs_mean = 0.0;
  double cv_median = 0.0;
  double cv_mean = 0.0;
  double underestimation_pct = 0.0;  // percentage of clusters with RB_i < 0
};

/// estimates: replicates x n.
EstimatorMetrics compute_metrics(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& smse);

double median(Eigen::VectorXd values);

struct ReplicateRow {
  Index replicate = 0;
  Index cluster = 0;  // 0-based
  double theta_true = 0.0;
  double theta_hat = 0.0;
  double naive = 0.0;
  double mse_boot = 0.0;
  double mse_double = 0.0;
  double mse_bc_robust = 0.0;
};

struct StudyResult {
  Scenario scenario;
  ErrorModel model;
  Family family = Family::three_point;
  Index replicates = 0;
  Eigen::VectorXd smse;
  EstimatorMetrics naive;   // RBN
  EstimatorMetrics boot;    // single bootstrap, uncorrected
  EstimatorMetrics robust;  // bias-corrected, positivity preserving
  std::vector<ReplicateRow> log;
  Index bootstrap_failures = 0;
  Index family_fallbacks = 0;
};

/// Recomputes SMSE and every metric from the raw replicate log.
void summarize_log(StudyResult& result);

using ProgressFn = std::function<void(Index done, Index total)>;

/// Monte Carlo study: every replicate simulates data on the fixed design,
/// fits, and runs the double bootstrap with master seed
/// derive_seed(cfg.master_seed, study_bootstrap, k). Replicates run on
/// cfg.jobs workers; results are merged in replicate order.
StudyResult run_study(const Scenario& sc, const ErrorModel& model, const BootstrapConfig& cfg,
                      Index replicates, const ProgressFn& progress = {});

}  // namespace mmboot
