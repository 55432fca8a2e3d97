#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "p2g/config.hpp"
#include "p2g/report.hpp"

namespace p2g {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitConfig = 2, kExitData = 3, kExitRuntime = 4 };

class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes the generated case-study instance as CSV.
void run_generate(const std::string& case_name, std::uint64_t seed, const std::filesystem::path& out,
                  const GeneratorConfig& generator = {});

struct TrainRequest {
  std::string algo;              // dqn | ppo | cem
  bool base = false;             // train without reward shaping
  int jobs = 1;                  // concurrent seeds
  bool with_oracle = true;       // also solve (or reuse) the oracles of the instance
};

struct TrainOutcome {
  std::filesystem::path run_dir;
  std::vector<EvalReport> reports;  // seed order
  std::optional<OracleSummary> oracle;
  std::vector<DominanceViolation> violations;  // seeds above the DP return
};

/// Label of a run directory: the algorithm, suffixed with the shaping variant.
std::string run_label(const std::string& algo, const ShapingConfig& shaping, bool base);

/// Trains every configured seed and writes, under `output_dir/<label>`:
/// `config.json`, `manifest.json`, `data.csv`, `eval.csv`, `aggregate.csv`, and per seed
/// `seed_<n>/{curve.csv, dispatch.csv, checkpoint files}`.
TrainOutcome run_training(const ExperimentConfig& config, const TrainRequest& request);

/// Solves the DP and battery-only oracles; writes `output_dir/oracle/{oracle.json, key.txt,
/// dp_schedule.csv, bes_only_schedule.csv, config.json}`. Reuses a stored result for the
/// same instance and grid. Horizons above `oracle.max_horizon` throw OracleError unless forced.
OracleSummary run_oracle(const ExperimentConfig& config, bool force = false);

struct ReportOutcome {
  std::vector<std::filesystem::path> written;
  std::vector<DominanceViolation> violations;
  std::vector<std::string> unchecked;  // runs without an oracle for their instance
  std::string markdown;
};

/// Collects every run under `runs_dir`, writes one table and one plot per
/// instance into `out_dir`, and checks each agent return against the DP return.
ReportOutcome run_report(const std::filesystem::path& runs_dir, const std::filesystem::path& out_dir);

}  // namespace p2g
