#include "mmboot/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include "mmboot/errors.hpp"
#include "mmboot/parallel.hpp"

namespace mmboot {

std::string_view to_string(ErrorLaw law) noexcept {
  switch (law) {
    case ErrorLaw::normal: return "normal";
    case ErrorLaw::sqrt_chi2_5: return "sqrt_chi2_5";
    case ErrorLaw::chi2_5: return "chi2_5";
    case ErrorLaw::neg_chi2_5: return "neg_chi2_5";
    case ErrorLaw::chi2_10: return "chi2_10";
    case ErrorLaw::exponential: return "exponential";
    case ErrorLaw::t6: return "t6";
    case ErrorLaw::logistic: return "logistic";
  }
  return "unknown";
}

double law_raw_mean(ErrorLaw law) {
  switch (law) {
    case ErrorLaw::normal: return 0.0;
    case ErrorLaw::sqrt_chi2_5: return std::sqrt(2.0) * std::tgamma(3.0) / std::tgamma(2.5);
    case ErrorLaw::chi2_5: return 5.0;
    case ErrorLaw::neg_chi2_5: return -5.0;
    case ErrorLaw::chi2_10: return 10.0;
    case ErrorLaw::exponential: return 1.0;
    case ErrorLaw::t6: return 0.0;
    case ErrorLaw::logistic: return 0.0;
  }
  return 0.0;
}

double law_raw_variance(ErrorLaw law) {
  switch (law) {
    case ErrorLaw::normal: return 1.0;
    case ErrorLaw::sqrt_chi2_5: {
      const double m = law_raw_mean(law);
      return 5.0 - m * m;
    }
    case ErrorLaw::chi2_5:
    case ErrorLaw::neg_chi2_5: return 10.0;
    case ErrorLaw::chi2_10: return 20.0;
    case ErrorLaw::exponential: return 1.0;
    case ErrorLaw::t6: return 6.0 / 4.0;
    case ErrorLaw::logistic: return std::numbers::pi * std::numbers::pi / 3.0;
  }
  return 1.0;
}

void draw_error(ErrorLaw law, double variance, Rng& rng, std::span<double> out) {
  if (!(variance >= 0.0)) fail(ErrorCode::invalid_argument, "variance must be non-negative");
  const double mean = law_raw_mean(law);
  const double scale = std::sqrt(variance / law_raw_variance(law));

  auto fill = [&](auto&& raw) {
    for (double& v : out) v = (raw() - mean) * scale;
  };
  switch (law) {
    case ErrorLaw::normal: {
      std::normal_distribution<double> d;
      return fill([&] { return d(rng); });
    }
    case ErrorLaw::sqrt_chi2_5: {
      std::chi_squared_distribution<double> d(5.0);
      return fill([&] { return std::sqrt(d(rng)); });
    }
    case ErrorLaw::chi2_5:
    case ErrorLaw::neg_chi2_5: {
      const double sign = law == ErrorLaw::chi2_5 ? 1.0 : -1.0;
      std::chi_squared_distribution<double> d(5.0);
      return fill([&] { return sign * d(rng); });
    }
    case ErrorLaw::chi2_10: {
      std::chi_squared_distribution<double> d(10.0);
      return fill([&] { return d(rng); });
    }
    case ErrorLaw::exponential: {
      std::exponential_distribution<double> d(1.0);
      return fill([&] { return d(rng); });
    }
    case ErrorLaw::t6:
      return fill([&] { return draw_student_t(rng, 6.0); });
    case ErrorLaw::logistic:
      return fill([&] {
        const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        return std::log(u / (1.0 - u));
      });
  }
}

Eigen::VectorXd draw_error(ErrorLaw law, double variance, Rng& rng, Index count) {
  Eigen::VectorXd out(count);
  draw_error(law, variance, rng, std::span<double>(out.data(), static_cast<std::size_t>(count)));
  return out;
}

namespace {

struct ModelInfo {
  ModelKind kind;
  std::string_view name;
  std::string_view description;
  ErrorLaw u;
  ErrorLaw v;
};

constexpr std::array<ModelInfo, 8> kModels{{
    {ModelKind::m1, "m1", "normal", ErrorLaw::normal, ErrorLaw::normal},
    {ModelKind::m2, "m2", "sqrt_chi2_5", ErrorLaw::sqrt_chi2_5, ErrorLaw::sqrt_chi2_5},
    {ModelKind::m3, "m3", "chi2_5", ErrorLaw::chi2_5, ErrorLaw::chi2_5},
    {ModelKind::m4, "m4", "chi2_10", ErrorLaw::chi2_10, ErrorLaw::chi2_10},
    {ModelKind::m5, "m5", "exponential", ErrorLaw::exponential, ErrorLaw::exponential},
    {ModelKind::m6, "m6", "chi2_5_neg_pair", ErrorLaw::chi2_5, ErrorLaw::neg_chi2_5},
    {ModelKind::m7, "m7", "t6", ErrorLaw::t6, ErrorLaw::t6},
    {ModelKind::m8, "m8", "logistic", ErrorLaw::logistic, ErrorLaw::logistic},
}};

const ModelInfo& info(ModelKind kind) { return kModels[static_cast<std::size_t>(kind) - 1]; }

}  // namespace

ErrorLaw ErrorModel::u_law() const { return info(kind).u; }
ErrorLaw ErrorModel::v_law() const { return info(kind).v; }
std::string_view ErrorModel::name() const { return info(kind).name; }
std::string_view ErrorModel::description() const { return info(kind).description; }

ErrorModel ErrorModel::parse(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& m : kModels) {
    if (lower == m.name || lower == m.description) return ErrorModel{m.kind};
  }
  fail(ErrorCode::invalid_argument, "unknown error model '" + std::string(text) +
                                        "' (expected m1..m8)");
}

std::array<ErrorModel, 8> ErrorModel::all() {
  std::array<ErrorModel, 8> out;
  for (std::size_t k = 0; k < kModels.size(); ++k) out[k] = ErrorModel{kModels[k].kind};
  return out;
}

Scenario Scenario::standard(Index n, double ratio) {
  Scenario sc;
  sc.n = n;
  if (ratio == 0.5) {
    sc.sigma2_u = 0.5;
    sc.sigma2_v = 1.0;
  } else if (ratio == 1.0) {
    sc.sigma2_u = 1.0;
    sc.sigma2_v = 1.0;
  } else if (ratio == 2.0) {
    sc.sigma2_u = 1.0;
    sc.sigma2_v = 0.5;
  } else {
    fail(ErrorCode::invalid_argument,
         "variance ratio must be one of {0.5, 1, 2}; custom ratios need --sigma-u/--sigma-v");
  }
  return sc;
}

void Scenario::validate() const {
  if (n < 2) fail(ErrorCode::invalid_argument, "need at least 2 clusters");
  if (cluster_size < 2) fail(ErrorCode::invalid_argument, "cluster size must be at least 2");
  if (!(s > 0.0)) fail(ErrorCode::invalid_argument, "scale s must be positive");
  if (!(sigma2_u >= 0.0) || !(sigma2_v >= 0.0)) {
    fail(ErrorCode::invalid_argument, "variances must be non-negative");
  }
  if (!(x_high > x_low)) fail(ErrorCode::invalid_argument, "covariate range is empty");
}

Dataset make_design(const Scenario& sc, Rng& rng) {
  sc.validate();
  std::vector<Cluster> clusters;
  clusters.reserve(static_cast<std::size_t>(sc.n));
  for (Index i = 0; i < sc.n; ++i) {
    Cluster c{std::to_string(i + 1), Eigen::MatrixXd(sc.cluster_size, 1),
              Eigen::VectorXd::Zero(sc.cluster_size),
              Eigen::VectorXd::Constant(sc.cluster_size, sc.s)};
    for (Index j = 0; j < sc.cluster_size; ++j) {
      c.x(j, 0) = sc.x_low + (sc.x_high - sc.x_low) * uniform01(rng);
    }
    clusters.push_back(std::move(c));
  }
  return Dataset::from_clusters(std::move(clusters));
}

SimulatedSample simulate_sample(const Dataset& design, const Scenario& sc, const ErrorModel& model,
                                Rng& rng) {
  const Index n = design.num_clusters();
  const Eigen::VectorXd u = draw_error(model.u_law(), sc.sigma2_u, rng, n);
  const Eigen::VectorXd v = draw_error(model.v_law(), sc.sigma2_v, rng, design.num_observations());

  const Eigen::VectorXd mean = (sc.beta * design.x().col(0)).array() + sc.mu;
  Eigen::VectorXd y = mean + design.s().cwiseProduct(v);
  Eigen::VectorXd theta(n);
  for (Index i = 0; i < n; ++i) {
    y.segment(design.offset(i), design.cluster_size(i)).array() += u(i);
    theta(i) = mean.segment(design.offset(i), design.cluster_size(i)).mean() + u(i);
  }
  return {design.with_responses(std::move(y)), std::move(theta)};
}

Eigen::VectorXd run_truth(const Scenario& sc, const ErrorModel& model, Index replicates,
                          std::uint64_t seed, const Ridge& ridge, unsigned jobs) {
  if (replicates < 1) fail(ErrorCode::invalid_argument, "need at least one replicate");
  Rng design_rng = make_stream(seed, Stream::study_design);
  const Dataset design = make_design(sc, design_rng);
  const Estimator est(design, ridge);

  std::vector<Eigen::VectorXd> sq(static_cast<std::size_t>(replicates));
  parallel_for(sq.size(), jobs, [&](std::size_t k) {
    Rng rng = make_stream(seed, Stream::study_data, k);
    const SimulatedSample sample = simulate_sample(design, sc, model, rng);
    const FittedModel fit = est.fit(sample.data, false);
    sq[k] = (fit.prediction.theta_hat - sample.theta).array().square().matrix();
  });
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(sc.n);
  for (const auto& v : sq) sum += v;
  return sum / static_cast<double>(replicates);
}

double median(Eigen::VectorXd values) {
  if (values.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.data(), values.data() + values.size());
  const Index m = values.size() / 2;
  return values.size() % 2 == 1 ? values(m) : 0.5 * (values(m - 1) + values(m));
}

EstimatorMetrics compute_metrics(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& smse) {
  if (estimates.cols() != smse.size() || estimates.rows() < 1) {
    fail(ErrorCode::dimension_mismatch, "estimates must be replicates x clusters");
  }
  const auto reps = static_cast<double>(estimates.rows());
  EstimatorMetrics m;
  const Eigen::VectorXd mean_est = estimates.colwise().mean().transpose();
  m.rb = (mean_est - smse).cwiseQuotient(smse);
  const Eigen::VectorXd msd =
      (estimates.rowwise() - smse.transpose()).array().square().colwise().sum().transpose() / reps;
  m.cv = msd.cwiseSqrt().cwiseQuotient(smse);

  m.rb_median = median(m.rb);
  m.rb_mean = m.rb.mean();
  m.rb_abs_median = median(m.rb.cwiseAbs());
  m.rb_abs_mean = m.rb.cwiseAbs().mean();
  m.cv_median = median(m.cv);
  m.cv_mean = m.cv.mean();
  m.underestimation_pct =
      100.0 * static_cast<double>((m.rb.array() < 0.0).count()) / static_cast<double>(m.rb.size());
  return m;
}

void summarize_log(StudyResult& result) {
  const Index n = result.scenario.n;
  const Index reps = result.replicates;
  if (static_cast<Index>(result.log.size()) != n * reps) {
    fail(ErrorCode::dimension_mismatch, "replicate log does not match replicates x clusters");
  }
  Eigen::MatrixXd naive(reps, n), boot(reps, n), robust(reps, n);
  Eigen::VectorXd sq_sum = Eigen::VectorXd::Zero(n);
  for (const auto& row : result.log) {
    naive(row.replicate, row.cluster) = row.naive;
    boot(row.replicate, row.cluster) = row.mse_boot;
    robust(row.replicate, row.cluster) = row.mse_bc_robust;
    const double err = row.theta_hat - row.theta_true;
    sq_sum(row.cluster) += err * err;
  }
  result.smse = sq_sum / static_cast<double>(reps);
  result.naive = compute_metrics(naive, result.smse);
  result.boot = compute_metrics(boot, result.smse);
  result.robust = compute_metrics(robust, result.smse);
}

StudyResult run_study(const Scenario& sc, const ErrorModel& model, const BootstrapConfig& cfg,
                      Index replicates, const ProgressFn& progress) {
  cfg.validate();
  if (replicates < 1) fail(ErrorCode::invalid_argument, "need at least one replicate");
  Rng design_rng = make_stream(cfg.master_seed, Stream::study_design);
  const Dataset design = make_design(sc, design_rng);
  const Estimator est(design, cfg.ridge);
  const Index n = sc.n;

  struct Outcome {
    Eigen::VectorXd theta, theta_hat, naive;
    MspeReport report;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(replicates));
  std::atomic<Index> done{0};
  std::mutex progress_mutex;

  parallel_for(outcomes.size(), cfg.jobs, [&](std::size_t k) {
    Rng rng = make_stream(cfg.master_seed, Stream::study_data, k);
    const SimulatedSample sample = simulate_sample(design, sc, model, rng);
    const FittedModel fit = est.fit(sample.data, true);

    BootstrapConfig inner = cfg;
    inner.master_seed = derive_seed(cfg.master_seed, Stream::study_bootstrap, k);
    inner.jobs = 1;
    outcomes[k] = Outcome{sample.theta, fit.prediction.theta_hat, fit.prediction.naive_mse,
                          mse_double(est, fit, inner)};
    const Index finished = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(finished, replicates);
    }
  });

  StudyResult result;
  result.scenario = sc;
  result.model = model;
  result.family = cfg.family;
  result.replicates = replicates;
  result.log.reserve(static_cast<std::size_t>(replicates * n));
  for (Index k = 0; k < replicates; ++k) {
    const Outcome& o = outcomes[static_cast<std::size_t>(k)];
    result.bootstrap_failures +=
        o.report.single_failures + o.report.outer_failures + o.report.inner_failures;
    result.family_fallbacks += o.report.family_fallbacks;
    for (Index i = 0; i < n; ++i) {
      result.log.push_back({k, i, o.theta(i), o.theta_hat(i), o.naive(i), o.report.mse_boot(i),
                            o.report.mse_double(i), o.report.mse_bc_robust(i)});
    }
  }
  summarize_log(result);
  return result;
}

}  // namespace mmboot
