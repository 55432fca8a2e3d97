#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "gradient_check.hpp"
#include "instances.hpp"
#include "p2g/config.hpp"
#include "p2g/economics.hpp"
#include "p2g/oracle.hpp"
#include "p2g/runner.hpp"

using namespace p2g;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::FILE* report_file = nullptr;  // copy of the verdict lines

void report(int id, const std::string& name, const std::function<Verdict()>& check) {
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  if (!v.pass) ++failures;
  for (std::FILE* out : {stdout, report_file}) {
    if (!out) continue;
    std::fprintf(out, "%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str());
    std::fflush(out);
  }
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const fs::path kRuns = "acceptance_runs";

ExperimentConfig case_config(const std::string& name) {
  ExperimentConfig c = load_config(fs::path(P2G_SOURCE_DIR) / "configs" / (name + ".json"));
  c.output_dir = kRuns / name;
  return c;
}

Verdict bes_break_even_check() {
  const auto start = Clock::now();
  const double price = bes_break_even(PlantParams{}).price;
  const double elapsed = seconds_since(start);
  return {std::abs(price - 158.0) <= 1.0 && elapsed < 1.0, fmt("%.2f C$/MWh in %.3f s", price, elapsed)};
}

Verdict p2g_break_even_check() {
  const auto start = Clock::now();
  const double price = p2g_gt_break_even(PlantParams{}).price;
  const double elapsed = seconds_since(start);
  return {std::abs(price - 504.0) <= 2.0 && elapsed < 1.0, fmt("%.2f C$/MWh in %.3f s", price, elapsed)};
}

Verdict oracle_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  const int n = 50;
  int equal = 0, with_gt = 0;
  for (int k = 0; k < n; ++k) {
    const EpisodeInstance inst =
        k % 2 ? p2g_test::random_spike_instance(rng, 6) : p2g_test::random_instance(rng, 6);
    const Env env(inst);
    const OracleResult bf = brute_force(env);
    const OracleResult dp = dp_solve(env, DpGrid::exact());
    if (dp.total_reward == bf.total_reward && dp.schedule == bf.schedule) ++equal;
    if (bf.log.summary().gt_hours > 0) ++with_gt;
  }
  const double elapsed = seconds_since(start);
  return {equal == n && elapsed < 60.0,
          fmt("%.0f/%.0f instances identical (%.0f dispatch the turbine) in %.1f s", equal, n, with_gt, elapsed)};
}

Verdict episode_sum_equality() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ShapingConfig shaping;
  shaping.cost_attribution.enabled = true;
  const ActionSpec spec;
  const std::size_t burn = joint_index({1, 1, 1}, spec);  // turbine at full power, P2G off, battery idle
  int accepted = 0, attempts = 0, burned = 0;
  double worst = 0.0;
  while (accepted < 1000) {
    ++attempts;
    const EpisodeInstance inst = u(rng) < 0.5 ? generate_cs1(rng()) : p2g_test::random_instance(rng, 24);
    Env shaped(inst, {}, {}, shaping), bare(inst);
    shaped.reset();
    bare.reset();
    const std::size_t random_steps = inst.size() - 1 - static_cast<std::size_t>(4 * u(rng));
    double sum_shaped = 0.0, sum_bare = 0.0;
    bool shifted = false;
    for (std::size_t t = 0; t < inst.size(); ++t) {
      const std::size_t a = t < random_steps ? static_cast<std::size_t>(u(rng) * 12) % 12 : burn;
      const double rs = shaped.step(a).reward, rb = bare.step(a).reward;
      shifted = shifted || rs != rb;
      sum_shaped += rs;
      sum_bare += rb;
    }
    if (shaped.state().plant.soc_p2g != 0.0) continue;
    ++accepted;
    if (shifted) ++burned;
    worst = std::max(worst, std::abs(sum_shaped - sum_bare));
  }
  return {worst < 1e-6, fmt("%.0f sequences (%.0f drawn, %.0f with rewards moved between steps), max |difference| %.3g C$",
                            accepted, attempts, burned, worst)};
}

Verdict constraint_suite() {
  const PlantParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double tol = 1e-9;
  long steps = 0, violations = 0, not_idempotent = 0;
  auto check = [&](const PlantState& next, double p_re, double p_bes, double p_gt, double p_p2g, double p_grid) {
    ++steps;
    const bool ok = std::abs(p_grid - (p_re + p_bes + p_gt + p_p2g)) <= tol && p_grid >= -tol &&
                    p_bes + p_p2g >= -p_re - tol && next.soc_bes >= p.bes_soc_min - tol &&
                    next.soc_bes <= p.bes_soc_max + tol && next.soc_p2g >= -tol && next.soc_p2g <= 1.0 + tol;
    if (!ok) ++violations;
  };
  // Whole episodes under random discrete actions.
  while (steps < 60000) {
    const EpisodeInstance inst = p2g_test::random_instance(rng, 48);
    Env env(inst);
    env.reset();
    for (std::size_t t = 0; t < inst.size(); ++t) {
      const StepRecord r = env.step(static_cast<std::size_t>(u(rng) * 12) % 12).record;
      check(env.state().plant, r.p_re, r.p_bes, r.p_gt, r.p_p2g, r.p_grid);
    }
  }
  // Continuous requests from random states, including nearly full storages.
  while (steps < 120000) {
    PlantState s;
    s.soc_bes = p.bes_soc_min + (p.bes_soc_max - p.bes_soc_min) * u(rng);
    const double g = u(rng);
    s.soc_p2g = g < 0.2 ? 0.0 : (g < 0.3 ? 1.0 - 0.001 * u(rng) : 0.05 * u(rng));
    if (u(rng) < 0.4) s.gt = {u(rng) < 0.5 ? GtMode::StartedRecently : GtMode::RunningLong, 1 + static_cast<int>(12 * u(rng))};
    if (s.gt.on() && s.gt.run_hours > 7) s.gt.mode = GtMode::RunningLong;
    const double p_re = u(rng) < 0.1 ? 0.0 : 31.5 * u(rng);
    const Setpoints req{u(rng) < 0.5 ? 0.0 : p.gt_power_max * u(rng),
                        u(rng) < 0.5 ? 0.0 : p.p2g_power_min + (p.p2g_power_max - p.p2g_power_min) * u(rng),
                        p.bes_power_min + (p.bes_power_max - p.bes_power_min) * u(rng)};
    const Setpoints once = project_action(req, s, p_re, p);
    if (!(project_action(once, s, p_re, p) == once)) ++not_idempotent;
    const Transition tr = simulate_step(s, req, p_re, 100.0 * u(rng), p);
    check(tr.next, p_re, tr.p_bes, tr.p_gt, tr.p_p2g, tr.p_grid);
  }
  return {violations == 0 && not_idempotent == 0,
          fmt("%.0f steps, %.0f constraint violations, %.0f non-idempotent projections", static_cast<double>(steps),
              static_cast<double>(violations), static_cast<double>(not_idempotent))};
}

Verdict gradient_check() {
  std::mt19937_64 rng(5);
  const int n = 100;
  int good = 0;
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const double err = p2g_test::mlp_gradient_error(rng);
    worst = std::max(worst, err);
    if (err < 1e-4) ++good;
  }
  return {good == n, fmt("%.0f/%.0f configurations below 1e-4, worst %.2g", good, n, worst)};
}

Verdict dqn_competence() {
  const auto start = Clock::now();
  const ExperimentConfig config = case_config("cs1");
  const TrainOutcome out = run_training(config, {"dqn"});
  const double elapsed = seconds_since(start);
  if (!out.oracle) return {false, "no oracle"};
  const double dp = out.oracle->dp_return;
  int good = 0;
  std::string returns;
  for (const EvalReport& r : out.reports) {
    if (r.episodic_reward >= 0.95 * dp) ++good;
    returns += fmt(" %.0f", r.episodic_reward);
  }
  return {good >= 3 && elapsed <= 600.0,
          fmt("%.0f/5 seeds at >= 95%% of DP %.0f in %.0f s; returns", good, dp, elapsed) + returns};
}

Verdict shaping_effect() {
  const auto start = Clock::now();
  const ExperimentConfig config = case_config("cs2");
  const TrainOutcome base = run_training(config, {"ppo", true});
  const TrainOutcome shaped = run_training(config, {"ppo", false});
  const double elapsed = seconds_since(start);
  if (!shaped.oracle) return {false, "no oracle"};
  double base_mean = 0.0;
  int base_idle = 0;
  for (const EvalReport& r : base.reports) {
    base_mean += r.episodic_reward / static_cast<double>(base.reports.size());
    if (r.p2g_hours == 0) ++base_idle;
  }
  const double bes_only = shaped.oracle->bes_only_return;
  int good = 0;
  std::string detail;
  for (const EvalReport& r : shaped.reports) {
    if (r.p2g_hours > 0 && r.episodic_reward > base_mean && r.episodic_reward > bes_only) ++good;
    detail += fmt(" %.0f/%.0fh", r.episodic_reward, r.p2g_hours);
  }
  return {good >= 3 && base_idle >= 3 && elapsed <= 1800.0,
          fmt("base: %.0f/5 seeds without P2G, mean %.0f; shaped: %.0f/5 seeds qualify (BES-only %.0f);", base_idle,
              base_mean, good, bes_only) +
              " shaped return/P2G hours" + detail + fmt(" in %.0f s", elapsed)};
}

Verdict dominance() {
  const ReportOutcome out = run_report(kRuns, kRuns / "report");
  std::string detail = fmt("%.0f violations, %.0f unchecked runs", static_cast<double>(out.violations.size()),
                           static_cast<double>(out.unchecked.size()));
  for (const DominanceViolation& v : out.violations)
    detail += "; " + v.label + fmt(" seed %.0f: %.1f > %.1f", static_cast<double>(v.seed), v.agent_return, v.dp_return);
  return {out.violations.empty() && out.unchecked.empty(), detail};
}

Verdict determinism() {
  ExperimentConfig config = case_config("cs1");
  config.dqn.total_steps = 3000;
  config.ppo.total_steps = 4096;
  config.seeds = {0, 1};
  bool same = true;
  std::string detail;
  for (const char* algo : {"dqn", "ppo", "cem"}) {
    if (std::string(algo) == "cem") config.cem.iterations = 5;
    std::string first;
    for (int run = 0; run < 2; ++run) {
      config.output_dir = kRuns / "determinism" / ("run" + std::to_string(run));
      const TrainOutcome out = run_training(config, {algo, false, 1, false});
      const std::string text = slurp(out.run_dir / "eval.csv");
      if (run == 0) {
        first = text;
      } else if (text != first || text.empty()) {
        same = false;
        detail += std::string(" ") + algo + " differs;";
      }
    }
  }
  fs::remove_all(kRuns / "determinism");
  return {same, same ? "eval.csv byte-identical across two runs for dqn, ppo and cem" : detail};
}

}  // namespace

int main() {
  fs::remove_all(kRuns);
  report_file = std::fopen("acceptance_report.txt", "w");
  report(1, "battery break-even", bes_break_even_check);
  report(2, "P2G-GT break-even", p2g_break_even_check);
  report(3, "DP equals brute force", oracle_equivalence);
  report(4, "cost attribution keeps the episode sum", episode_sum_equality);
  report(5, "constraints and projection", constraint_suite);
  report(6, "MLP gradients", gradient_check);
  report(7, "DQN on CS1", dqn_competence);
  report(8, "shaping effect with PPO on CS2", shaping_effect);
  report(9, "dominance", dominance);
  report(10, "determinism", determinism);
  for (std::FILE* out : {stdout, report_file})
    if (out) std::fprintf(out, "%d of 10 criteria failed\n", failures);
  if (report_file) std::fclose(report_file);
  return failures == 0 ? 0 : 1;
}
