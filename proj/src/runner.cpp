#include "p2g/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "p2g/io.hpp"

namespace p2g {

namespace {

namespace fs = std::filesystem;

struct SeedResult {
  Evaluation evaluation;
  TrainingCurve curve;
  std::vector<std::pair<std::string, std::string>> checkpoints;  // file name, contents
};

std::string to_text(const nn::Mlp<double>& net) {
  std::ostringstream out;
  net.save(out);
  return out.str();
}

SeedResult train_seed(const std::string& algo, const Env& prototype, const ExperimentConfig& config,
                      std::uint64_t seed) {
  const EnvFactory factory = [&prototype] { return prototype; };
  const ActionSpec& spec = prototype.config().actions;
  SeedResult out;
  if (algo == "dqn") {
    DqnResult r = dqn_train(factory, config.dqn, seed);
    out.evaluation = evaluate(greedy_q_policy(r.q_network, spec), prototype, static_cast<long>(seed));
    out.curve = std::move(r.curve);
    out.checkpoints.emplace_back("q_network.txt", to_text(r.q_network));
  } else if (algo == "ppo") {
    PpoResult r = ppo_train(factory, config.ppo, seed);
    out.evaluation = evaluate(greedy_actor_policy(r.actor, spec), prototype, static_cast<long>(seed));
    out.curve = std::move(r.curve);
    out.checkpoints.emplace_back("actor.txt", to_text(r.actor));
    out.checkpoints.emplace_back("critic.txt", to_text(r.critic));
  } else if (algo == "cem") {
    CemResult r = cem_train(factory, config.cem, seed);
    out.evaluation = evaluate(argmax_policy(r.policy, spec), prototype, static_cast<long>(seed));
    out.curve = std::move(r.curve);
    out.checkpoints.emplace_back("policy.txt", to_text(r.policy));
  } else {
    throw std::invalid_argument("unknown algorithm '" + algo + "' (expected dqn, ppo or cem)");
  }
  return out;
}

std::string csv_text(const EpisodeInstance& instance) {
  std::ostringstream out;
  write_csv(instance, out);
  return out.str();
}

std::string grid_key(const std::string& data_hash, const ExperimentConfig& c) {
  const DpGrid& g = c.oracle.grid;
  std::ostringstream out;
  out << data_hash << ' ' << (g.mode == DpGrid::Mode::Exact ? "exact" : "gridded") << ' '
      << (g.lookup == DpGrid::Lookup::Linear ? "linear" : "nearest") << ' ' << g.bes_points << ' '
      << g.p2g_points << ' ' << g.gt_hours_cap << '\n';
  // Plant parameters and action levels are part of the key.
  ExperimentConfig model;
  model.plant = c.plant;
  model.env.actions = c.env.actions;
  model.seeds = {0};
  model.output_dir = "-";
  out << git_blob_hash(to_json_text(model)) << '\n';
  return out.str();
}

template <typename Fn>
void for_each_parallel(std::size_t n, int jobs, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void run_generate(const std::string& case_name, std::uint64_t seed, const fs::path& out,
                  const GeneratorConfig& generator) {
  EpisodeInstance instance;
  if (case_name == "cs1") {
    instance = generate_cs1(seed, generator);
  } else if (case_name == "cs2") {
    instance = generate_cs2(seed, generator);
  } else {
    throw std::invalid_argument("unknown case '" + case_name + "' (expected cs1 or cs2)");
  }
  write_file(out, csv_text(instance));
}

std::string run_label(const std::string& algo, const ShapingConfig& shaping, bool base) {
  if (!shaping.any()) return algo;
  return algo + (base ? "-base" : "-shaped");
}

TrainOutcome run_training(const ExperimentConfig& config, const TrainRequest& request) {
  if (request.algo != "dqn" && request.algo != "ppo" && request.algo != "cem")
    throw std::invalid_argument("unknown algorithm '" + request.algo + "' (expected dqn, ppo or cem)");
  const EpisodeInstance instance = load_instance(config);
  const std::string data = csv_text(instance);
  const std::string hash = git_blob_hash(data);

  ShapingConfig shaping = config.shaping;
  if (request.base) shaping = {};
  Env prototype(instance, config.plant, config.env, shaping);
  prototype.set_training(true);

  TrainOutcome outcome;
  const std::string label = run_label(request.algo, config.shaping, request.base);
  outcome.run_dir = config.output_dir / label;
  fs::create_directories(outcome.run_dir);
  ExperimentConfig resolved = config;
  resolved.shaping = shaping;
  write_file(outcome.run_dir / "config.json", to_json_text(resolved));
  write_file(outcome.run_dir / "data.csv", data);

  std::vector<SeedResult> results(config.seeds.size());
  for_each_parallel(config.seeds.size(), request.jobs,
                    [&](std::size_t i) { results[i] = train_seed(request.algo, prototype, config, config.seeds[i]); });

  RunManifest manifest{label, request.algo, config.name, hash, {}, instance.size()};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::uint64_t seed = config.seeds[i];
    manifest.seeds.push_back(static_cast<long>(seed));
    const fs::path dir = outcome.run_dir / ("seed_" + std::to_string(seed));
    std::ostringstream curve, dispatch;
    results[i].curve.write_csv(curve);
    results[i].evaluation.log.write_csv(dispatch);
    write_file(dir / "curve.csv", curve.str());
    write_file(dir / "dispatch.csv", dispatch.str());
    for (const auto& [name, text] : results[i].checkpoints) write_file(dir / name, text);
    outcome.reports.push_back(results[i].evaluation.report);
  }
  std::ostringstream eval;
  write_eval_csv(outcome.reports, eval);
  write_file(outcome.run_dir / "eval.csv", eval.str());

  const TableRow row = table_row(label, outcome.reports);
  std::ostringstream aggregate;
  aggregate << "metric,mean,std\n";
  const std::pair<const char*, ReportStats> stats[] = {
      {"episodic_reward", row.reward}, {"gt_starts", row.gt_starts},   {"gt_hours", row.gt_hours},
      {"p2g_hours", row.p2g_hours},    {"bes_charge", row.bes_charge}, {"bes_discharge", row.bes_discharge}};
  for (const auto& [name, st] : stats)
    aggregate << name << ',' << format_double(st.mean) << ',' << format_double(st.std) << '\n';
  write_file(outcome.run_dir / "aggregate.csv", aggregate.str());
  write_file(outcome.run_dir / "manifest.json", to_json_text(manifest));

  if (request.with_oracle && instance.size() <= config.oracle.max_horizon) {
    outcome.oracle = run_oracle(config);
    const RunRecord run{label, request.algo, config.name, hash, outcome.reports, {}};
    outcome.violations = check_dominance(run, *outcome.oracle);
  }
  return outcome;
}

OracleSummary run_oracle(const ExperimentConfig& config, bool force) {
  const EpisodeInstance instance = load_instance(config);
  if (instance.size() > config.oracle.max_horizon && !force)
    throw OracleError("instance has " + std::to_string(instance.size()) + " steps, above oracle.max_horizon = " +
                      std::to_string(config.oracle.max_horizon) + "; pass --force to solve anyway");
  const std::string data = csv_text(instance);
  const std::string hash = git_blob_hash(data);
  const fs::path dir = config.output_dir / "oracle";
  const std::string key = grid_key(hash, config);
  if (fs::exists(dir / "key.txt") && fs::exists(dir / "oracle.json") && read_file(dir / "key.txt") == key)
    return oracle_summary_from_json(read_file(dir / "oracle.json"));

  Env env(instance, config.plant, config.env);
  env.set_training(false);
  const OracleResult dp = dp_solve(env, config.oracle.grid);
  const OracleResult bes = bes_only_solve(env, config.oracle.grid);

  OracleSummary s;
  s.data_hash = hash;
  s.horizon = instance.size();
  s.dp_value = dp.value;
  s.dp_return = dp.total_reward;
  s.bes_only_return = bes.total_reward;
  s.sell_only_return = sell_only_return(instance);
  s.snap_allowance = snap_bound(env, config.oracle.grid).return_bound;
  s.dp_summary = dp.log.summary();
  s.bes_only_summary = bes.log.summary();

  std::ostringstream dp_csv, bes_csv;
  dp.log.write_csv(dp_csv);
  bes.log.write_csv(bes_csv);
  write_file(dir / "dp_schedule.csv", dp_csv.str());
  write_file(dir / "bes_only_schedule.csv", bes_csv.str());
  write_file(dir / "config.json", to_json_text(config));
  write_file(dir / "data.csv", data);
  write_file(dir / "oracle.json", to_json_text(s));
  write_file(dir / "key.txt", key);
  return s;
}

ReportOutcome run_report(const fs::path& runs_dir, const fs::path& out_dir) {
  if (!fs::is_directory(runs_dir)) throw std::invalid_argument("runs directory '" + runs_dir.string() + "' not found");
  std::vector<fs::path> manifests, oracles;
  for (const auto& entry : fs::recursive_directory_iterator(runs_dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == "manifest.json") manifests.push_back(entry.path());
    if (entry.path().filename() == "oracle.json") oracles.push_back(entry.path());
  }
  if (manifests.empty()) throw RuntimeFailure("no runs found under '" + runs_dir.string() + "'");
  std::sort(manifests.begin(), manifests.end());
  std::sort(oracles.begin(), oracles.end());

  std::map<std::string, OracleSummary> oracle_by_hash;
  for (const auto& path : oracles) {
    OracleSummary s = oracle_summary_from_json(read_file(path));
    oracle_by_hash.try_emplace(s.data_hash, std::move(s));
  }
  std::map<std::string, std::vector<RunRecord>> groups;  // by data hash
  for (const auto& path : manifests) {
    RunRecord run = load_run(path.parent_path());
    groups[run.data_hash].push_back(std::move(run));
  }

  ReportOutcome outcome;
  fs::create_directories(out_dir);
  for (const auto& [hash, runs] : groups) {
    const std::string name = runs.front().config_name + "-" + hash.substr(0, 8);
    std::vector<TableRow> rows;
    for (const RunRecord& run : runs) rows.push_back(table_row(run.label, run.reports));
    std::vector<ReferenceLine> refs;
    const auto it = oracle_by_hash.find(hash);
    if (it != oracle_by_hash.end()) {
      rows.push_back(table_row("dp-oracle", it->second.dp_summary));
      rows.push_back(table_row("bes-only-oracle", it->second.bes_only_summary));
      refs.push_back({"DP oracle", it->second.dp_return});
      refs.push_back({"BES-only oracle", it->second.bes_only_return});
      for (const RunRecord& run : runs) {
        auto v = check_dominance(run, it->second);
        outcome.violations.insert(outcome.violations.end(), v.begin(), v.end());
      }
    } else {
      for (const RunRecord& run : runs) outcome.unchecked.push_back(name + "/" + run.label);
    }

    std::ostringstream csv, md;
    write_table_csv(rows, csv);
    md << "### " << runs.front().config_name << " (data " << hash.substr(0, 8) << ")\n\n";
    write_table_markdown(rows, md);
    md << '\n';
    outcome.markdown += md.str();
    const fs::path csv_path = out_dir / ("table_" + name + ".csv");
    const fs::path md_path = out_dir / ("table_" + name + ".md");
    const fs::path svg_path = out_dir / ("curves_" + name + ".svg");
    write_file(csv_path, csv.str());
    write_file(md_path, md.str());
    write_file(svg_path, training_curve_svg(runs.front().config_name + ": evaluation return", runs, refs));
    outcome.written.insert(outcome.written.end(), {csv_path, md_path, svg_path});
  }
  return outcome;
}

}  // namespace p2g
