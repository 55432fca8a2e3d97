#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "p2g/config.hpp"
#include "p2g/report.hpp"
#include "p2g/runner.hpp"

using namespace p2g;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("p2g_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig tiny(const fs::path& out) {
  ExperimentConfig c = parse_config(R"({"data": {"source": "cs1", "seed": 3}, "seeds": [0, 1], "output_dir": "x"})");
  c.output_dir = out;
  c.dqn.total_steps = 600;
  c.dqn.learning_starts = 100;
  c.dqn.eval_interval = 200;
  c.dqn.hidden = {16};
  c.oracle.grid.bes_points = 11;
  c.oracle.grid.p2g_points = 11;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("required keys") {
    CHECK(config_error(R"({"data": {"source": "cs1"}, "output_dir": "x"})").find("seeds") != std::string::npos);
    CHECK(config_error(R"({"seeds": [0], "output_dir": "x"})").find("data") != std::string::npos);
  }
  SUBCASE("unknown keys name their path") {
    const std::string err =
        config_error(R"({"data": {"source": "cs1"}, "seeds": [0], "output_dir": "x", "env": {"foo": 1}})");
    CHECK(err.find("env.foo") != std::string::npos);
  }
  SUBCASE("wrong type") {
    CHECK(config_error(R"({"data": {"source": "cs1"}, "seeds": "zero", "output_dir": "x"})").find("seeds") !=
          std::string::npos);
  }
  SUBCASE("bad lookup mode") {
    CHECK_FALSE(config_error(R"({"data": {"source": "cs1"}, "seeds": [0], "output_dir": "x",
                                 "oracle": {"lookup": "cubic"}})")
                    .empty());
  }
  SUBCASE("defaults fill the rest") {
    const ExperimentConfig c = parse_config(R"({"data": {"source": "cs2", "seed": 4}, "seeds": [7], "output_dir": "o"})");
    CHECK(c.data.kind == DataSource::Kind::Cs2);
    CHECK(c.seeds == std::vector<std::uint64_t>{7});
    CHECK(c.plant.bes_capacity == 50.0);
    CHECK(c.oracle.grid.lookup == DpGrid::Lookup::Linear);
  }
}

TEST_CASE("resolved config round trip") {
  const fs::path dir = fs::path(P2G_SOURCE_DIR) / "configs";
  for (const char* name : {"cs1.json", "cs2.json", "cs3.json"}) {
    const ExperimentConfig c = load_config(dir / name);
    const std::string text = to_json_text(c);
    CHECK(to_json_text(parse_config(text)) == text);
  }
}

TEST_CASE("instance hash") {
  CHECK(instance_hash(generate_cs1(0)) == instance_hash(generate_cs1(0)));
  CHECK(instance_hash(generate_cs1(0)) != instance_hash(generate_cs1(1)));
  CHECK(instance_hash(generate_cs1(0)).size() == 40);
}

TEST_CASE("training, oracle and report") {
  const fs::path root = scratch("report");
  const ExperimentConfig config = tiny(root / "runs");
  const TrainOutcome dqn = run_training(config, {"dqn"});
  REQUIRE(dqn.oracle.has_value());
  CHECK(dqn.reports.size() == 2);
  CHECK(dqn.violations.empty());
  for (const char* file : {"config.json", "manifest.json", "data.csv", "eval.csv", "aggregate.csv"})
    CHECK(fs::exists(dqn.run_dir / file));
  CHECK(fs::exists(dqn.run_dir / "seed_1" / "curve.csv"));
  CHECK(fs::exists(root / "runs" / "oracle" / "oracle.json"));

  SUBCASE("oracle results are reused") {
    const OracleSummary again = run_oracle(config);
    CHECK(again.dp_return == dqn.oracle->dp_return);
    CHECK(again.dp_return <= again.dp_value + again.snap_allowance + 1e-6);
    CHECK(again.bes_only_return >= again.sell_only_return);
  }

  SUBCASE("report tables every run") {
    ExperimentConfig cem = config;
    cem.cem.iterations = 3;
    cem.cem.population = 6;
    run_training(cem, {"cem"});
    const ReportOutcome report = run_report(root / "runs", root / "report");
    CHECK(report.violations.empty());
    CHECK(report.unchecked.empty());
    CHECK(report.markdown.find("dqn") != std::string::npos);
    CHECK(report.markdown.find("cem") != std::string::npos);
    CHECK(report.markdown.find("dp-oracle") != std::string::npos);
    bool svg = false;
    for (const fs::path& p : report.written)
      if (p.extension() == ".svg") {
        svg = true;
        CHECK(slurp(p).find("DP oracle") != std::string::npos);
      }
    CHECK(svg);
  }

  SUBCASE("an agent above the DP return is flagged") {
    RunRecord run = load_run(dqn.run_dir);
    run.reports[0].episodic_reward = dqn.oracle->dp_return + 1.0;
    const auto v = check_dominance(run, *dqn.oracle);
    REQUIRE(v.size() == 1);
    CHECK(v[0].seed == 0);
  }

  SUBCASE("evaluation output is reproducible") {
    const std::string first = slurp(dqn.run_dir / "eval.csv");
    run_training(config, {"dqn", false, 1, false});
    CHECK(slurp(dqn.run_dir / "eval.csv") == first);
  }
  fs::remove_all(root);
}

TEST_CASE("report without runs") {
  const fs::path root = scratch("empty");
  fs::create_directories(root);
  CHECK_THROWS_AS(run_report(root, root / "out"), RuntimeFailure);
  fs::remove_all(root);
}

TEST_CASE("long instances need force for the oracle") {
  ExperimentConfig c = tiny(scratch("force"));
  c.oracle.max_horizon = 10;
  CHECK_THROWS_AS(run_oracle(c), OracleError);
  fs::remove_all(c.output_dir);
}
