#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

namespace mmboot::cli {

using nlohmann::ordered_json;

std::string num(double v) { return fmt::format("{}", v); }

namespace {

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json metrics_json(const EstimatorMetrics& m) {
  return ordered_json{{"rb_median", number(m.rb_median)},
                      {"rb_mean", number(m.rb_mean)},
                      {"rb_abs_median", number(m.rb_abs_median)},
                      {"rb_abs_mean", number(m.rb_abs_mean)},
                      {"cv_median", number(m.cv_median)},
                      {"cv_mean", number(m.cv_mean)},
                      {"underestimation_pct", number(m.underestimation_pct)}};
}

}  // namespace

ordered_json config_json(const BootstrapConfig& cfg) {
  ordered_json j;
  j["b1"] = cfg.b1;
  j["b2"] = cfg.b2;
  j["c"] = cfg.c;
  j["family"] = std::string(to_string(cfg.family));
  j["g"] = std::string(to_string(cfg.g.kind));
  if (cfg.g.kind == GKind::clipped) j["c_clip"] = cfg.g.c_clip;
  j["ridge_b1"] = cfg.ridge.b1;
  j["ridge_b2"] = cfg.ridge.b2;
  j["seed"] = cfg.master_seed;
  return j;
}

ordered_json fit_json(const Dataset& d, const FittedModel& fit, const MspeReport& report,
                      const BootstrapConfig& cfg) {
  ordered_json j;
  j["num_clusters"] = d.num_clusters();
  j["observations"] = d.num_observations();
  j["covariates"] = d.dim();
  j["config"] = config_json(cfg);

  ordered_json est;
  est["mu"] = fit.fixed.mu;
  est["beta"] = std::vector<double>(fit.fixed.beta.data(), fit.fixed.beta.data() + fit.fixed.beta.size());
  est["sigma2_u"] = fit.variance.sigma2_u;
  est["sigma2_v"] = fit.variance.sigma2_v;
  est["gamma_u"] = fit.moments.gamma_u;
  est["gamma_v"] = fit.moments.gamma_v;
  est["sse1"] = fit.variance.sse1;
  est["sse2"] = fit.variance.sse2;
  est["k"] = fit.variance.k_constant;
  j["estimates"] = est;

  j["failures"] = ordered_json{{"single", report.single_failures},
                               {"outer", report.outer_failures},
                               {"inner", report.inner_failures}};
  j["family_fallbacks"] = report.family_fallbacks;

  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < d.num_clusters(); ++i) {
    rows.push_back(ordered_json{{"cluster", d.id(i)},
                                {"n_i", d.cluster_size(i)},
                                {"eblup", report.eblup(i)},
                                {"rho", report.rho(i)},
                                {"naive", report.naive(i)},
                                {"mse_boot", report.mse_boot(i)},
                                {"mse_boot_se", number(report.mse_boot_se(i))},
                                {"bias", report.bias_boot(i)},
                                {"mse_double", report.mse_double(i)},
                                {"mse_bc_simple", report.mse_bc_simple(i)},
                                {"mse_bc_robust", report.mse_bc_robust(i)}});
  }
  j["clusters"] = rows;
  return j;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& d) {
  out << "cluster,y,s";
  for (Index k = 0; k < d.dim(); ++k) out << ",x" << k + 1;
  out << '\n';
  for (Index i = 0; i < d.num_clusters(); ++i) {
    for (Index j = d.offset(i); j < d.offset(i + 1); ++j) {
      out << csv_field(d.id(i)) << ',' << num(d.y()(j)) << ',' << num(d.s()(j));
      for (Index k = 0; k < d.dim(); ++k) out << ',' << num(d.x()(j, k));
      out << '\n';
    }
  }
}

void write_fit_csv(std::ostream& out, const Dataset& d, const MspeReport& report) {
  out << "cluster,n_i,eblup,rho,naive,mse_boot,bias,mse_double,mse_bc_simple,mse_bc_robust\n";
  for (Index i = 0; i < d.num_clusters(); ++i) {
    out << csv_field(d.id(i)) << ',' << d.cluster_size(i) << ',' << num(report.eblup(i)) << ','
        << num(report.rho(i)) << ',' << num(report.naive(i)) << ',' << num(report.mse_boot(i))
        << ',' << num(report.bias_boot(i)) << ',' << num(report.mse_double(i)) << ','
        << num(report.mse_bc_simple(i)) << ',' << num(report.mse_bc_robust(i)) << '\n';
  }
}

ordered_json study_json(const StudyResult& r) {
  ordered_json j;
  j["model"] = std::string(r.model.name());
  j["description"] = std::string(r.model.description());
  j["family"] = std::string(to_string(r.family));
  j["replicates"] = r.replicates;
  j["rb_median"] = number(r.robust.rb_median);
  j["rb_mean"] = number(r.robust.rb_mean);
  j["cv_median"] = number(r.robust.cv_median);
  j["cv_mean"] = number(r.robust.cv_mean);
  j["rbn_median"] = number(r.naive.rb_median);
  j["rbn_mean"] = number(r.naive.rb_mean);
  j["smse_mean"] = number(r.smse.mean());
  j["estimators"] = ordered_json{{"robust", metrics_json(r.robust)},
                                 {"boot", metrics_json(r.boot)},
                                 {"naive", metrics_json(r.naive)}};
  j["bootstrap_failures"] = r.bootstrap_failures;
  j["family_fallbacks"] = r.family_fallbacks;
  return j;
}

void write_study_log(std::ostream& out, const StudyResult& r) {
  out << "replicate,cluster,theta_true,theta_hat,naive,mse_boot,mse_double,mse_bc_robust\n";
  for (const ReplicateRow& row : r.log) {
    out << row.replicate + 1 << ',' << row.cluster + 1 << ',' << num(row.theta_true) << ','
        << num(row.theta_hat) << ',' << num(row.naive) << ',' << num(row.mse_boot) << ','
        << num(row.mse_double) << ',' << num(row.mse_bc_robust) << '\n';
  }
}

void render_table(std::ostream& out, const std::vector<StudyResult>& results) {
  if (results.empty()) return;
  std::vector<Family> families;
  std::vector<std::string> models;
  std::map<std::pair<std::string, Family>, const StudyResult*> cell;
  std::map<std::string, const StudyResult*> naive_of;
  for (const StudyResult& r : results) {
    const std::string m(r.model.name());
    if (std::find(families.begin(), families.end(), r.family) == families.end()) {
      families.push_back(r.family);
    }
    if (std::find(models.begin(), models.end(), m) == models.end()) models.push_back(m);
    cell[{m, r.family}] = &r;
    naive_of.try_emplace(m, &r);
  }

  const Scenario& sc = results.front().scenario;
  out << fmt::format("n = {}, n_i = {}, sigma_U^2 = {}, sigma_V^2 = {}, replicates = {}\n", sc.n,
                     sc.cluster_size, num(sc.sigma2_u), num(sc.sigma2_v),
                     results.front().replicates);
  std::string header = fmt::format("{:<6}{:<8}", "model", "");
  for (const Family f : families) {
    const std::string tag = f == Family::three_point ? "3pt" : "t";
    header += fmt::format("{:>10}{:>10}", "RB " + tag, "CV " + tag);
  }
  header += fmt::format("{:>10}\n", "RBN");
  out << header << std::string(header.size() - 1, '-') << '\n';

  for (const std::string& m : models) {
    for (const bool median_line : {true, false}) {
      std::string line = fmt::format("{:<6}{:<8}", median_line ? m : "", median_line ? "median" : "mean");
      for (const Family f : families) {
        const auto it = cell.find({m, f});
        if (it == cell.end()) {
          line += fmt::format("{:>10}{:>10}", "-", "-");
          continue;
        }
        const EstimatorMetrics& e = it->second->robust;
        line += fmt::format("{:>10.3f}{:>10.3f}", median_line ? e.rb_median : e.rb_mean,
                            median_line ? e.cv_median : e.cv_mean);
      }
      const EstimatorMetrics& n = naive_of.at(m)->naive;
      line += fmt::format("{:>10.3f}\n", median_line ? n.rb_median : n.rb_mean);
      out << line;
    }
  }
}

}  // namespace mmboot::cli
