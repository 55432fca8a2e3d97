#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "p2g/runner.hpp"
#include "p2g/version.hpp"

namespace {

using namespace p2g;

ExperimentConfig load_with_overrides(const std::string& path, const std::vector<std::uint64_t>& seeds,
                                     const std::string& out) {
  ExperimentConfig config = load_config(path);
  if (!seeds.empty()) config.seeds = seeds;
  if (!out.empty()) config.output_dir = out;
  config.validate();
  return config;
}

void print_violations(const std::vector<DominanceViolation>& violations) {
  for (const auto& v : violations)
    std::cerr << "dominance violated: " << v.label << " seed " << v.seed << " return " << v.agent_return
              << " > dp return " << v.dp_return << '\n';
}

void print_reports(const TrainOutcome& outcome) {
  std::printf("%-6s %14s %9s %8s %9s %10s %13s\n", "seed", "reward", "gt_starts", "gt_hours", "p2g_hours",
              "bes_charge", "bes_discharge");
  std::vector<double> rewards;
  for (const EvalReport& r : outcome.reports) {
    std::printf("%-6ld %14.1f %9d %8d %9d %10d %13d\n", r.seed, r.episodic_reward, r.gt_starts, r.gt_hours,
                r.p2g_hours, r.bes_charge, r.bes_discharge);
    rewards.push_back(r.episodic_reward);
  }
  const ReportStats st = mean_std(rewards);
  std::printf("mean reward %.1f +- %.1f\n", st.mean, st.std);
  if (outcome.oracle)
    std::printf("dp oracle %.1f, bes-only oracle %.1f\n", outcome.oracle->dp_return, outcome.oracle->bes_only_return);
  std::printf("wrote %s\n", outcome.run_dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dispatch lab for a wind, battery, power-to-gas and gas-turbine plant"};
  app.set_version_flag("--version", std::string("p2g ") + p2g::kVersion);
  app.require_subcommand(1);

  std::string case_name, out_path;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate", "Write a synthetic case-study instance as CSV");
  gen->add_option("--case", case_name, "cs1 or cs2")->required()->check(CLI::IsMember({"cs1", "cs2"}));
  gen->add_option("--seed", gen_seed, "Generator seed")->required();
  gen->add_option("--out", out_path, "Output CSV path")->required();

  std::string algo, config_path, out_dir;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
  bool base = false, no_oracle = false;
  auto* train = app.add_subcommand("train", "Train an agent on every configured seed");
  train->add_option("--algo", algo, "dqn, ppo or cem")->required()->check(CLI::IsMember({"dqn", "ppo", "cem"}));
  train->add_option("--config", config_path, "Experiment config (JSON)")->required();
  train->add_option("--seeds", seeds, "Override the configured seeds");
  train->add_option("--out", out_dir, "Override the configured output directory");
  train->add_option("--jobs", jobs, "Seeds trained concurrently")->check(CLI::PositiveNumber);
  train->add_flag("--base", base, "Disable reward shaping");
  train->add_flag("--no-oracle", no_oracle, "Skip the oracle solve");

  bool bes_only = false, force = false;
  auto* oracle = app.add_subcommand("oracle", "Solve the dynamic-programming oracles");
  oracle->add_option("--config", config_path, "Experiment config (JSON)")->required();
  oracle->add_option("--out", out_dir, "Override the configured output directory");
  oracle->add_flag("--bes-only", bes_only, "Print the battery-only benchmark");
  oracle->add_flag("--force", force, "Solve horizons above oracle.max_horizon");

  std::string runs_dir;
  auto* report = app.add_subcommand("report", "Tables and training-curve plots across runs");
  report->add_option("--runs", runs_dir, "Directory with run outputs")->required();
  report->add_option("--out", out_dir, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      run_generate(case_name, gen_seed, out_path);
      std::printf("wrote %s\n", out_path.c_str());
    } else if (*train) {
      const ExperimentConfig config = load_with_overrides(config_path, seeds, out_dir);
      const TrainOutcome outcome = run_training(config, {algo, base, jobs, !no_oracle});
      print_reports(outcome);
      print_violations(outcome.violations);
      if (!outcome.violations.empty()) return kExitRuntime;
    } else if (*oracle) {
      const ExperimentConfig config = load_with_overrides(config_path, {}, out_dir);
      const OracleSummary s = run_oracle(config, force);
      if (bes_only) {
        std::printf("bes-only return %.1f\n", s.bes_only_return);
      } else {
        std::printf("dp value %.1f, re-simulated return %.1f\n", s.dp_value, s.dp_return);
        std::printf("bes-only return %.1f, sell-only return %.1f\n", s.bes_only_return, s.sell_only_return);
      }
      std::printf("wrote %s\n", (config.output_dir / "oracle").string().c_str());
    } else if (*report) {
      const ReportOutcome r = run_report(runs_dir, out_dir);
      std::cout << r.markdown;
      for (const auto& name : r.unchecked) std::cerr << "warning: no oracle for " << name << ", dominance unchecked\n";
      print_violations(r.violations);
      for (const auto& p : r.written) std::printf("wrote %s\n", p.string().c_str());
      if (!r.violations.empty()) return kExitRuntime;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
