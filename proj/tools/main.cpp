// Command line front end: config-driven experiment runs and one-off
// prediction intervals for user-supplied CSV data.

#include <CLI11.hpp>

#include <Eigen/Dense>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "loopi/config_io.hpp"
#include "loopi/csv.hpp"
#include "loopi/intervals.hpp"
#include "loopi/runner.hpp"
#include "loopi/version.hpp"

namespace {

constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

int command_run(const std::string& config_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed_override, int jobs) {
  loopi::ExperimentConfig config;
  try {
    config = loopi::parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (seed_override) config.seed = *seed_override;

  try {
    const loopi::RunOutcome outcome =
        loopi::run_to_directory(config, out_dir, jobs);
    if (outcome.budget_exceeded) {
      std::cerr << "run aborted: " << outcome.budget_message << "\n";
      return kExitRuntimeError;
    }
    std::cout << loopi::render_summary(outcome.report);
    std::cout << "outputs written to " << out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

struct PredictOptions {
  std::string data_path;
  std::string x0_path;
  std::string estimator;
  std::optional<double> lambda;
  std::optional<double> huber_k;
  std::optional<double> js_c;
  double alpha = 0.05;
  std::optional<double> split_nu;
  std::string one_sided;  // "", "lower", "upper"
  std::string out_csv;
  int jobs = 1;
};

loopi::EstimatorSpec estimator_from_flags(const PredictOptions& opt) {
  const std::string& kind = opt.estimator;
  if (kind == "ols") return loopi::EstimatorSpec::ols();
  if (kind == "ridge") {
    if (!opt.lambda)
      throw loopi::ConfigError("estimator ridge requires --lambda");
    return loopi::EstimatorSpec::ridge(*opt.lambda);
  }
  if (kind == "lasso") {
    if (!opt.lambda)
      throw loopi::ConfigError("estimator lasso requires --lambda");
    return loopi::EstimatorSpec::lasso(*opt.lambda);
  }
  if (kind == "huber") {
    if (!opt.huber_k)
      throw loopi::ConfigError("estimator huber requires --huber-k");
    return loopi::EstimatorSpec::huber(*opt.huber_k);
  }
  if (kind == "james_stein") {
    if (!opt.js_c)
      throw loopi::ConfigError("estimator james_stein requires --js-c");
    return loopi::EstimatorSpec::james_stein(*opt.js_c);
  }
  throw loopi::ConfigError("unknown estimator '" + kind +
                           "' (ols | ridge | lasso | huber | james_stein)");
}

int command_predict(const PredictOptions& opt) {
  try {
    const loopi::EstimatorSpec spec = estimator_from_flags(opt);
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0))
      throw loopi::ConfigError("--alpha must be in (0,1)");
    loopi::IntervalSide side = loopi::IntervalSide::two_sided;
    if (opt.one_sided == "lower") side = loopi::IntervalSide::lower_only;
    else if (opt.one_sided == "upper") side = loopi::IntervalSide::upper_only;
    else if (!opt.one_sided.empty())
      throw loopi::ConfigError("--one-sided must be 'lower' or 'upper'");

    const loopi::CsvTable data = loopi::read_numeric_csv(opt.data_path);
    if (data.columns.size() < 2)
      throw loopi::ConfigError(
          "training data needs a response column and at least one feature");
    const Eigen::Index n = static_cast<Eigen::Index>(data.rows.size());
    const Eigen::Index p = static_cast<Eigen::Index>(data.columns.size()) - 1;
    if (n < 2) throw loopi::ConfigError("training data needs n >= 2 rows");
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = data.rows[static_cast<std::size_t>(i)][0];
      for (Eigen::Index j = 0; j < p; ++j)
        x(i, j) = data.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j) + 1];
    }

    const loopi::CsvTable x0_table = loopi::read_numeric_csv(opt.x0_path);
    if (static_cast<Eigen::Index>(x0_table.columns.size()) != p)
      throw loopi::ConfigError(
          "x0 file must have exactly the feature columns of the training data");
    if (x0_table.rows.empty())
      throw loopi::ConfigError("x0 file has no rows");

    std::vector<loopi::PredictionInterval> intervals;
    if (opt.split_nu) {
      for (const auto& row : x0_table.rows) {
        Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(
            row.data(), static_cast<Eigen::Index>(row.size()));
        intervals.push_back(loopi::build_split_interval(
            spec, x, y, x0, *opt.split_nu, opt.alpha, side));
      }
    } else {
      const loopi::FitResult fitted = loopi::fit(spec, x, y);
      const loopi::LooResiduals loo = loopi::loo_residuals(spec, x, y, opt.jobs);
      for (const auto& row : x0_table.rows) {
        Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(
            row.data(), static_cast<Eigen::Index>(row.size()));
        intervals.push_back(
            loopi::build_interval(x0, fitted.beta, loo, opt.alpha, side));
      }
    }

    std::cout << "point,lower,upper\n";
    std::string csv = "point,lower,upper\n";
    bool warned = false;
    for (const auto& pi : intervals) {
      const std::string line = loopi::format_double(pi.point) + "," +
                               loopi::format_double(pi.lower) + "," +
                               loopi::format_double(pi.upper) + "\n";
      std::cout << line;
      csv += line;
      warned = warned || pi.small_sample_warning;
    }
    if (warned)
      std::cerr << "warning: fewer residuals than ceil(2/alpha); "
                   "the quantiles sit on extreme order statistics\n";
    if (!opt.out_csv.empty()) loopi::write_file_atomic(opt.out_csv, csv);
    return 0;
  } catch (const loopi::ConfigError& e) {
    std::cerr << "predict: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "predict: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leave-one-out prediction intervals for linear regression "
               "with many variables"};
  app.set_version_flag("--version", LOOPI_VERSION);
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a config-driven experiment");
  std::string config_path, out_dir;
  std::uint64_t seed_value = 0;
  int run_jobs = 1;
  run->add_option("--config", config_path, "Experiment config (JSON)")
      ->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* seed_opt =
      run->add_option("--seed", seed_value, "Override the master seed");
  run->add_option("--jobs", run_jobs,
                  "Worker threads (never affects results)");

  // predict
  auto* predict = app.add_subcommand(
      "predict", "Prediction interval for user-supplied CSV data");
  PredictOptions opt;
  predict->add_option("--data", opt.data_path,
                      "CSV with header; first column response, rest features")
      ->required();
  predict->add_option("--x0", opt.x0_path,
                      "CSV with header; feature rows to predict at")
      ->required();
  predict->add_option("--estimator", opt.estimator,
                      "ols | ridge | lasso | huber | james_stein")
      ->required();
  double lambda = 0.0, huber_k = 0.0, js_c = 0.0, split_nu = 0.0;
  auto* lambda_opt = predict->add_option("--lambda", lambda, "ridge/lasso penalty");
  auto* huber_opt = predict->add_option("--huber-k", huber_k, "huber threshold");
  auto* js_opt = predict->add_option("--js-c", js_c, "james_stein constant");
  predict->add_option("--alpha", opt.alpha, "Miscoverage level (default 0.05)");
  auto* split_opt = predict->add_option(
      "--split", split_nu, "Sample-splitting fraction nu in (0,1)");
  predict->add_option("--one-sided", opt.one_sided, "lower | upper");
  predict->add_option("--out", opt.out_csv, "Also write intervals to CSV");
  predict->add_option("--jobs", opt.jobs, "Worker threads for the refits");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    std::optional<std::uint64_t> seed;
    if (seed_opt->count() > 0) seed = seed_value;
    return command_run(config_path, out_dir, seed, run_jobs);
  }
  if (lambda_opt->count() > 0) opt.lambda = lambda;
  if (huber_opt->count() > 0) opt.huber_k = huber_k;
  if (js_opt->count() > 0) opt.js_c = js_c;
  if (split_opt->count() > 0) opt.split_nu = split_nu;
  return command_predict(opt);
}
