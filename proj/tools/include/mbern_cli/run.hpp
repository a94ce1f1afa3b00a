#pragma once

// Subcommand dispatch for the command-line front end.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbern/checks.hpp"
#include "mbern_cli/config.hpp"
#include "mbern_cli/report.hpp"

namespace mbern::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitDominanceFailure = 1,
  kExitConfigError = 2,
  kExitRuntimeError = 3,
};

struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> out;
  std::optional<Format> format;
  std::optional<unsigned> threads;
  bool exact = false;
};

// Applies command-line overrides to a parsed config.
void apply_flags(ExperimentConfig& cfg, const RunFlags& flags);

struct Report {
  std::vector<ReportRow> rows;
  std::vector<BaselineRow> baselines;   // compare only
  std::vector<checks::CheckResult> checks;  // inequalities only
  nlohmann::json meta;                  // kernel only
  bool pass = true;
};

// Runs the pipeline without touching the filesystem. Throws ConfigError when
// the parameters are inconsistent, mbern::Error for runtime failures.
Report execute(const ExperimentConfig& cfg, unsigned threads);

// Loads the config, runs it, writes the outputs, returns the exit code.
// Diagnostics go to `err`; output without a configured path goes to `out`.
int run(const std::string& config_path, const RunFlags& flags, std::ostream& out,
        std::ostream& err);

// MB_THREADS if set and valid, else the hardware concurrency (at least 1).
unsigned default_threads();

}  // namespace mbern::cli
