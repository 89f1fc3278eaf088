#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "loopi/validation.hpp"

namespace loopi {

struct RunManifest {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string tool_version;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;
};

struct RunOutcome {
  ExperimentReport report;
  RunManifest manifest;
  bool budget_exceeded = false;  // estimator failures above the config budget
  std::string budget_message;
};

// Runs the experiment and writes coverage.csv, diagnostics.csv, summary.csv
// and manifest.json into out_dir (created if missing). Every file is written
// atomically. When the failure budget is exceeded nothing is written and
// budget_exceeded is set.
RunOutcome run_to_directory(const ExperimentConfig& config,
                            const std::filesystem::path& out_dir,
                            int jobs = 1);

// The human-readable summary table (4 significant digits).
std::string render_summary(const ExperimentReport& report);

}  // namespace loopi
