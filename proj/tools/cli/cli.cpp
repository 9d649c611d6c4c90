#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "mmboot/csv.hpp"
#include "mmboot/mmdist.hpp"
#include "mmboot/mspe.hpp"
#include "mmboot/simulate.hpp"
#include "report.hpp"

namespace mmboot::cli {

int exit_code_for(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::validation: return exit_usage;
    case ErrorCategory::data: return exit_data;
    case ErrorCategory::numerical: return exit_numerical;
  }
  return exit_internal;
}

namespace {

struct BootstrapOptions {
  std::optional<Index> b1;
  std::optional<Index> b2;
  std::optional<Index> c;
  std::string family = "three-point";
  std::string g = "arctan";
  double c_clip = 1.0;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  double ridge_b1 = Ridge{}.b1;
  double ridge_b2 = Ridge{}.b2;
  bool desk = false;
  std::string config;  // consumed before parsing; declared for --help
};

void add_bootstrap_options(CLI::App* cmd, BootstrapOptions& o, bool with_family) {
  cmd->add_option("--b1", o.b1, "worlds for the single-bootstrap MSE (default 400, desk 100)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--b2", o.b2, "outer worlds of the double bootstrap (default 200, desk 50)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--c", o.c, "inner worlds per outer world (default 100, desk 50)")
      ->check(CLI::PositiveNumber);
  if (with_family) {
    cmd->add_option("--family", o.family, "matching distribution: three-point or student-t")
        ->capture_default_str();
  }
  cmd->add_option("--g", o.g, "correction function: arctan or clipped")->capture_default_str();
  cmd->add_option("--c-clip", o.c_clip, "clipping constant for --g clipped")->capture_default_str();
  cmd->add_option("--seed", o.seed, "master seed (drawn from system entropy and printed if omitted)");
  cmd->add_option("--jobs", o.jobs, "worker threads, 0 = all cores; output does not depend on it")
      ->capture_default_str();
  cmd->add_option("--ridge-b1", o.ridge_b1, "ridge constant B1 > 0")->capture_default_str();
  cmd->add_option("--ridge-b2", o.ridge_b2, "ridge exponent B2 >= 2")->capture_default_str();
  cmd->add_flag("--desk", o.desk, "desk-scale replicate counts");
  cmd->add_option("--config", o.config, "flat key=value file of flag values; flags override it");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& err) {
  if (seed) return *seed;
  const std::uint64_t s = entropy_seed();
  err << "mmboot: no --seed given, using seed " << s << '\n';
  return s;
}

BootstrapConfig make_config(const BootstrapOptions& o, std::ostream& err) {
  BootstrapConfig cfg = o.desk ? BootstrapConfig::desk() : BootstrapConfig::production();
  if (o.b1) cfg.b1 = *o.b1;
  if (o.b2) cfg.b2 = *o.b2;
  if (o.c) cfg.c = *o.c;
  cfg.family = parse_family(o.family);
  cfg.g = GFunction{parse_g_kind(o.g), o.c_clip};
  cfg.ridge = Ridge{o.ridge_b1, o.ridge_b2};
  cfg.jobs = o.jobs;
  cfg.validate();
  cfg.master_seed = resolve_seed(o.seed, err);
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------- fit

struct FitOptions {
  BootstrapOptions boot;
  std::string input;
  std::string output;
};

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  const BootstrapConfig cfg = make_config(o.boot, err);
  const Dataset d = read_dataset_csv(std::filesystem::path(o.input));
  const Estimator est(d, cfg.ridge);
  const FittedModel fitted = est.fit(d, true);
  const MspeReport report = mse_double(est, fitted, cfg);

  std::ostringstream csv;
  write_fit_csv(csv, d, report);
  if (o.output.empty()) {
    out << csv.str();
  } else {
    write_file(o.output + ".csv", csv.str());
    write_file(o.output + ".json", fit_json(d, fitted, report, cfg).dump(2) + "\n");
  }
  if (report.family_fallbacks > 0) {
    err << "mmboot: student-t fell back to three-point " << report.family_fallbacks
        << " times (kurtosis not above 3)\n";
  }
  return exit_ok;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  BootstrapOptions boot;
  std::vector<std::string> models{"m1"};
  bool all_models = false;
  Index n = 60;
  std::optional<double> ratio;
  std::optional<double> sigma_u;
  std::optional<double> sigma_v;
  std::optional<Index> replicates;
  std::string family = "three-point";
  bool table = false;
  bool quiet = false;
  std::string output;
};

Scenario make_scenario(const SimulateOptions& o) {
  if (o.sigma_u.has_value() != o.sigma_v.has_value()) {
    fail(ErrorCode::invalid_argument, "--sigma-u and --sigma-v must be given together");
  }
  Scenario sc;
  if (o.sigma_u) {
    if (o.ratio) fail(ErrorCode::invalid_argument, "--ratio cannot be combined with --sigma-u/--sigma-v");
    sc.n = o.n;
    sc.sigma2_u = *o.sigma_u * *o.sigma_u;
    sc.sigma2_v = *o.sigma_v * *o.sigma_v;
  } else {
    sc = Scenario::standard(o.n, o.ratio.value_or(1.0));
  }
  sc.validate();
  return sc;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  const Scenario sc = make_scenario(o);
  BootstrapConfig cfg = make_config(o.boot, err);
  const Index replicates = o.replicates.value_or(o.boot.desk ? 200 : 500);
  if (replicates < 1) fail(ErrorCode::invalid_argument, "--replicates must be at least 1");

  std::vector<ErrorModel> models;
  if (o.all_models) {
    const auto all = ErrorModel::all();
    models.assign(all.begin(), all.end());
  } else {
    for (const std::string& m : o.models) models.push_back(ErrorModel::parse(m));
  }
  std::vector<Family> families;
  if (o.family == "both") {
    families = {Family::three_point, Family::student_t};
  } else {
    families = {parse_family(o.family)};
  }

  std::vector<StudyResult> results;
  for (const ErrorModel& model : models) {
    for (const Family family : families) {
      cfg.family = family;
      const std::string label = fmt::format("{} {}", model.name(), to_string(family));
      const Index step = std::max<Index>(1, replicates / 10);
      ProgressFn progress;
      if (!o.quiet) {
        progress = [&](Index done, Index total) {
          if (done % step == 0 || done == total) {
            err << fmt::format("[{}] {}/{}\n", label, done, total) << std::flush;
          }
        };
      }
      results.push_back(run_study(sc, model, cfg, replicates, progress));
      if (!o.output.empty()) {
        std::ostringstream log;
        write_study_log(log, results.back());
        write_file(fmt::format("{}_{}_{}.csv", o.output, model.name(), to_string(family)), log.str());
      }
    }
  }

  nlohmann::ordered_json summary;
  summary["scenario"] = {{"n", sc.n},           {"cluster_size", sc.cluster_size},
                         {"mu", sc.mu},         {"beta", sc.beta},
                         {"s", sc.s},           {"sigma2_u", sc.sigma2_u},
                         {"sigma2_v", sc.sigma2_v}, {"x_low", sc.x_low},
                         {"x_high", sc.x_high}, {"replicates", replicates}};
  nlohmann::ordered_json config = config_json(cfg);
  config.erase("family");
  summary["config"] = config;
  summary["studies"] = nlohmann::ordered_json::array();
  for (const StudyResult& r : results) summary["studies"].push_back(study_json(r));

  if (!o.output.empty()) write_file(o.output + "_summary.json", summary.dump(2) + "\n");
  if (o.table) {
    render_table(out, results);
  } else if (o.output.empty()) {
    out << summary.dump(2) << '\n';
  }
  return exit_ok;
}

// ---------------------------------------------------------------- sample

struct SampleOptions {
  std::string model = "m1";
  Index n = 60;
  std::optional<double> ratio;
  std::optional<double> sigma_u;
  std::optional<double> sigma_v;
  std::optional<std::uint64_t> seed;
  std::string output;
};

int cmd_sample(const SampleOptions& o, std::ostream& out, std::ostream& err) {
  SimulateOptions sim;
  sim.n = o.n;
  sim.ratio = o.ratio;
  sim.sigma_u = o.sigma_u;
  sim.sigma_v = o.sigma_v;
  const Scenario sc = make_scenario(sim);
  const ErrorModel model = ErrorModel::parse(o.model);
  const std::uint64_t seed = resolve_seed(o.seed, err);

  Rng design_rng = make_stream(seed, Stream::study_design);
  const Dataset design = make_design(sc, design_rng);
  Rng data_rng = make_stream(seed, Stream::study_data);
  const SimulatedSample s = simulate_sample(design, sc, model, data_rng);

  std::ostringstream csv;
  write_dataset_csv(csv, s.data);
  if (o.output.empty()) {
    out << csv.str();
  } else {
    write_file(o.output, csv.str());
  }
  return exit_ok;
}

// ---------------------------------------------------------------- dist

struct DistOptions {
  std::string family;
  double z2 = 0.0;
  double z4 = 0.0;
  Index count = 100000;
  std::optional<std::uint64_t> seed;
};

int cmd_dist(const DistOptions& o, std::ostream& out, std::ostream& err) {
  const Family family = parse_family(o.family);
  const MatchedDistribution dist = family == Family::three_point
                                       ? MatchedDistribution::three_point(o.z2, o.z4)
                                       : MatchedDistribution::student_t(o.z2, o.z4);
  if (o.count < 2) fail(ErrorCode::invalid_argument, "--count must be at least 2");
  const std::uint64_t seed = resolve_seed(o.seed, err);

  out << "family: " << to_string(family) << '\n';
  out << "z2: " << num(o.z2) << "  z4: " << num(o.z4) << '\n';
  if (dist.is_point_mass()) {
    out << "point mass at 0\n";
  } else if (family == Family::three_point) {
    out << fmt::format("p: {:.10g}\n", dist.p());
    out << fmt::format("atoms: 0 (prob {:.10g}), +-{:.10g} (prob {:.10g} each)\n", 1.0 - dist.p(),
                       dist.atom(), dist.p() / 2.0);
  } else {
    out << fmt::format("df: {:.10g}\nscale: {:.10g}\n", dist.dof(), dist.scale());
  }

  Rng rng = make_stream(seed, Stream::sampler);
  const Eigen::ArrayXd x = sample(dist, rng, o.count).array();
  const auto count = static_cast<double>(o.count);
  out << fmt::format("draws: {}  seed: {}\n", o.count, seed);
  out << fmt::format("{:<8}{:>14}{:>14}{:>14}\n", "moment", "target", "empirical", "std_error");
  const double targets[] = {0.0, o.z2, 0.0, o.z4};
  for (int k = 1; k <= 4; ++k) {
    const Eigen::ArrayXd p = x.pow(k);
    const double mean = p.mean();
    const double se = std::sqrt((p - mean).square().sum() / (count - 1.0) / count);
    out << fmt::format("{:<8}{:>14.6g}{:>14.6g}{:>14.3g}\n", fmt::format("E Z^{}", k),
                       targets[k - 1], mean, se);
  }
  return exit_ok;
}

/// Splices the key=value pairs of every --config file into the argument list
/// right after the subcommand, so explicit flags (parsed later) take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::vector<std::string> injected;
  for (std::size_t k = 0; k < args.size(); ++k) {
    std::string path;
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw CLI::ArgumentMismatch("--config requires a file argument");
      path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
      continue;
    }
    for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
      if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "default")) {
        throw CLI::ConversionError("config file '" + path + "': sections are not supported");
      }
      const std::string flag = "--" + item.name;
      if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
        if (item.inputs[0] == "true") injected.push_back(flag);
        continue;
      }
      for (const std::string& v : item.inputs) {
        injected.push_back(flag);
        injected.push_back(v);
      }
    }
  }
  if (injected.empty()) return rest;
  auto sub = std::find_if(rest.begin(), rest.end(),
                          [](const std::string& a) { return !a.empty() && a[0] != '-'; });
  if (sub == rest.end()) throw CLI::ArgumentMismatch("--config requires a subcommand");
  rest.insert(sub + 1, injected.begin(), injected.end());
  return rest;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment-matching double-bootstrap MSPE estimation for nested-error regression"};
  app.name("mmboot");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a CSV dataset and report per-cluster MSPE");
  fit_cmd->add_option("--input", fit.input, "CSV with columns cluster,y[,s],x1,...")
      ->required()
      ->check(CLI::ExistingFile);
  fit_cmd->add_option("--output", fit.output,
                      "report prefix: writes PREFIX.json and PREFIX.csv (default: CSV to stdout)");
  add_bootstrap_options(fit_cmd, fit.boot, true);

  SimulateOptions sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of the MSPE estimators");
  auto* model_opt = sim_cmd->add_option("--model", sim.models, "error model m1..m8 (repeatable)")
                        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
                        ->capture_default_str();
  sim_cmd->add_flag("--all-models", sim.all_models, "run m1..m8")->excludes(model_opt);
  sim_cmd->add_option("--n", sim.n, "number of clusters")->capture_default_str();
  sim_cmd->add_option("--ratio", sim.ratio, "sigma_U^2 / sigma_V^2, one of 0.5, 1, 2 (default 1)");
  sim_cmd->add_option("--sigma-u", sim.sigma_u, "custom sigma_U (standard deviation)");
  sim_cmd->add_option("--sigma-v", sim.sigma_v, "custom sigma_V (standard deviation)");
  sim_cmd->add_option("--replicates", sim.replicates, "simulation replicates (default 500, desk 200)");
  sim_cmd->add_option("--family", sim.family, "three-point, student-t or both")->capture_default_str();
  sim_cmd->add_flag("--table", sim.table, "print a summary table to stdout");
  sim_cmd->add_flag("--quiet", sim.quiet, "no progress on stderr");
  sim_cmd->add_option("--output", sim.output,
                      "prefix for PREFIX_<model>_<family>.csv logs and PREFIX_summary.json");
  add_bootstrap_options(sim_cmd, sim.boot, false);

  SampleOptions smp;
  CLI::App* sample_cmd = app.add_subcommand("sample", "draw one dataset from a simulation scenario");
  sample_cmd->add_option("--model", smp.model, "error model m1..m8")->capture_default_str();
  sample_cmd->add_option("--n", smp.n, "number of clusters")->capture_default_str();
  sample_cmd->add_option("--ratio", smp.ratio, "sigma_U^2 / sigma_V^2, one of 0.5, 1, 2 (default 1)");
  sample_cmd->add_option("--sigma-u", smp.sigma_u, "custom sigma_U (standard deviation)");
  sample_cmd->add_option("--sigma-v", smp.sigma_v, "custom sigma_V (standard deviation)");
  sample_cmd->add_option("--seed", smp.seed, "seed (drawn from system entropy if omitted)");
  sample_cmd->add_option("--output", smp.output, "CSV path (default: stdout)");

  DistOptions dist;
  CLI::App* dist_cmd = app.add_subcommand("dist", "inspect a moment-matching distribution");
  dist_cmd->add_option("family", dist.family, "three-point or student-t")->required();
  dist_cmd->add_option("z2", dist.z2, "variance")->required();
  dist_cmd->add_option("z4", dist.z4, "fourth moment")->required();
  dist_cmd->add_option("--count", dist.count, "number of draws")->capture_default_str();
  dist_cmd->add_option("--seed", dist.seed, "seed (drawn from system entropy if omitted)");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out, err);
    if (sample_cmd->parsed()) return cmd_sample(smp, out, err);
    return cmd_dist(dist, out, err);
  } catch (const Error& e) {
    err << "mmboot: " << e.what() << '\n';
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    err << "mmboot: internal error: " << e.what() << '\n';
    return exit_internal;
  }
}

}  // namespace mmboot::cli
