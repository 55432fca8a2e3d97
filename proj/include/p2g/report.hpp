#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "p2g/evaluate.hpp"

namespace p2g {

/// Oracle returns for one episode instance, as written by the oracle runner.
struct OracleSummary {
  std::string data_hash;
  std::size_t horizon = 0;
  double dp_value = 0.0;     // DP optimum on its grid
  double dp_return = 0.0;    // DP schedule re-simulated
  double bes_only_return = 0.0;
  double sell_only_return = 0.0;
  double snap_allowance = 0.0;
  DispatchSummary dp_summary;
  DispatchSummary bes_only_summary;
};

std::string to_json_text(const OracleSummary& summary);
OracleSummary oracle_summary_from_json(const std::string& text);

/// One trained variant: all seeds of one algorithm on one instance.
struct RunRecord {
  std::string label;
  std::string algo;
  std::string config_name;
  std::string data_hash;
  std::vector<EvalReport> reports;       // seed order
  std::vector<TrainingCurve> curves;     // same order
};

struct RunManifest {
  std::string label;
  std::string algo;
  std::string config_name;
  std::string data_hash;
  std::vector<long> seeds;
  std::size_t horizon = 0;
};

std::string to_json_text(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

/// Reads `manifest.json`, `eval.csv` and the per-seed curves of a run directory.
RunRecord load_run(const std::filesystem::path& dir);

/// Mean and spread of every results-table column over the seeds.
struct TableRow {
  std::string label;
  std::size_t seeds = 0;
  ReportStats reward, gt_starts, gt_hours, p2g_hours, bes_charge, bes_discharge;
};

TableRow table_row(const std::string& label, const std::vector<EvalReport>& reports);
TableRow table_row(const std::string& label, const DispatchSummary& summary);

void write_table_csv(const std::vector<TableRow>& rows, std::ostream& out);
void write_table_markdown(const std::vector<TableRow>& rows, std::ostream& out);

/// Per-seed evaluation returns above the DP return of the same instance.
struct DominanceViolation {
  std::string label;
  long seed = 0;
  double agent_return = 0.0;
  double dp_return = 0.0;
};

std::vector<DominanceViolation> check_dominance(const RunRecord& run, const OracleSummary& oracle);

/// Mean evaluation return over training with a band of one standard deviation
/// across seeds, plus horizontal reference lines.
struct ReferenceLine {
  std::string label;
  double value = 0.0;
};

std::string training_curve_svg(const std::string& title, const std::vector<RunRecord>& runs,
                               const std::vector<ReferenceLine>& references);

}  // namespace p2g
