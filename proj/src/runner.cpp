#include "loopi/runner.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

#include <json.hpp>

#include "loopi/config_io.hpp"
#include "loopi/csv.hpp"
#include "loopi/version.hpp"

namespace loopi {

namespace {

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::string coverage_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "replication,estimator,coverage,scaled_length,tau_hat,flags\n";
  for (const auto& rec : report.records) {
    out << rec.replication << ',' << rec.estimator << ','
        << format_double(rec.coverage) << ','
        << format_double(rec.scaled_length) << ','
        << format_double(rec.tau_hat) << ',' << rec.flags << '\n';
  }
  return out.str();
}

std::string diagnostics_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "replication,estimator,perturbation_norm,l2_norm,lp_norm,delta,"
         "trace_pinv,trace_pinv2,lambda_min_scaled,flags\n";
  for (const auto& rec : report.records) {
    out << rec.replication << ',' << rec.estimator << ','
        << format_double(rec.perturbation_norm) << ','
        << format_double(rec.l2_norm) << ',' << format_double(rec.lp_norm)
        << ',' << format_double(report.delta) << ','
        << format_double(rec.trace_pinv) << ','
        << format_double(rec.trace_pinv2) << ','
        << format_double(rec.lambda_min_scaled) << ',' << rec.flags << '\n';
  }
  return out.str();
}

void summary_row(std::ostringstream& out, const std::string& estimator,
                 const char* metric, const MeanSe& value) {
  out << estimator << ',' << metric << ',' << format_double(value.mean) << ','
      << format_double(value.std_error) << ',' << value.count << '\n';
}

std::string summary_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "estimator,metric,value,std_error,count\n";
  for (const auto& s : report.summaries) {
    summary_row(out, s.estimator, "honesty_gap", s.honesty_gap);
    summary_row(out, s.estimator, "mean_coverage", s.coverage);
    summary_row(out, s.estimator, "mean_scaled_length", s.scaled_length);
    summary_row(out, s.estimator, "mean_tau_hat", s.tau_hat);
    summary_row(out, s.estimator, "mean_perturbation_norm", s.perturbation_norm);
    summary_row(out, s.estimator, "mean_lp_norm", s.lp_norm);
    out << s.estimator << ",failures," << s.failures << ",0,"
        << s.failures << '\n';
  }
  if (report.trace_pinv.count > 0) {
    summary_row(out, "design", "mean_trace_pinv", report.trace_pinv);
    summary_row(out, "design", "mean_trace_pinv2", report.trace_pinv2);
    summary_row(out, "design", "mean_lambda_min_scaled",
                report.lambda_min_scaled);
  }
  return out.str();
}

}  // namespace

std::string render_summary(const ExperimentReport& report) {
  std::ostringstream out;
  out << "estimator        metric                    value      se         n\n";
  auto row = [&](const std::string& est, const char* metric, const MeanSe& v) {
    std::string s = est;
    s.resize(17, ' ');
    std::string m(metric);
    m.resize(26, ' ');
    std::string val = format_double_short(v.mean);
    val.resize(11, ' ');
    std::string se = format_double_short(v.std_error);
    se.resize(11, ' ');
    out << s << m << val << se << v.count << '\n';
  };
  for (const auto& s : report.summaries) {
    row(s.estimator, "honesty_gap", s.honesty_gap);
    row(s.estimator, "mean_coverage", s.coverage);
    row(s.estimator, "mean_scaled_length", s.scaled_length);
    row(s.estimator, "mean_tau_hat", s.tau_hat);
    row(s.estimator, "mean_perturbation_norm", s.perturbation_norm);
    row(s.estimator, "mean_lp_norm", s.lp_norm);
    if (s.failures > 0)
      out << s.estimator << "  failures: " << s.failures << '\n';
  }
  if (report.trace_pinv.count > 0) {
    row("design", "mean_trace_pinv", report.trace_pinv);
    row("design", "mean_trace_pinv2", report.trace_pinv2);
    row("design", "mean_lambda_min_scaled", report.lambda_min_scaled);
  }
  return out.str();
}

RunOutcome run_to_directory(const ExperimentConfig& config,
                            const std::filesystem::path& out_dir, int jobs) {
  RunOutcome outcome;
  outcome.manifest.config_hash = config_hash(config);
  outcome.manifest.master_seed = config.seed;
  outcome.manifest.tool_version = LOOPI_VERSION;
  outcome.manifest.started_at = iso8601_now();

  outcome.report = run_experiment(config, jobs);

  // Failure budget: a flagged replication is recorded, but a run where any
  // estimator fails more often than the budget is not trustworthy output.
  for (const auto& s : outcome.report.summaries) {
    const double fraction = static_cast<double>(s.failures) /
                            static_cast<double>(config.replications);
    if (fraction > config.failure_budget) {
      outcome.budget_exceeded = true;
      std::ostringstream msg;
      msg << "estimator " << s.estimator << " failed in " << s.failures
          << " of " << config.replications
          << " replications (budget " << format_double_short(config.failure_budget)
          << ")";
      outcome.budget_message = msg.str();
      return outcome;
    }
  }

  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / "coverage.csv", coverage_csv(outcome.report));
  write_file_atomic(out_dir / "diagnostics.csv",
                    diagnostics_csv(outcome.report));
  write_file_atomic(out_dir / "summary.csv", summary_csv(outcome.report));
  outcome.manifest.outputs = {"coverage.csv", "diagnostics.csv", "summary.csv",
                              "manifest.json"};
  outcome.manifest.finished_at = iso8601_now();

  nlohmann::json manifest{
      {"config_hash", outcome.manifest.config_hash},
      {"master_seed", outcome.manifest.master_seed},
      {"tool_version", outcome.manifest.tool_version},
      {"started_at", outcome.manifest.started_at},
      {"finished_at", outcome.manifest.finished_at},
      {"outputs", outcome.manifest.outputs},
      {"config", to_json(config)},
  };
  write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return outcome;
}

}  // namespace loopi
