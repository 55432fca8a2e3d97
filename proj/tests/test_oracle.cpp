#include "doctest.h"

#include <random>

#include "instances.hpp"
#include "p2g/data.hpp"
#include "p2g/economics.hpp"
#include "p2g/oracle.hpp"

using namespace p2g;
using doctest::Approx;

namespace {

DpGrid coarse(DpGrid::Lookup lookup = DpGrid::Lookup::Nearest) {
  DpGrid g;
  g.bes_points = 11;
  g.p2g_points = 21;
  g.lookup = lookup;
  return g;
}

}  // namespace

TEST_CASE("flat prices: no storage, no turbine") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> wind(0.0, 31.5);
  EpisodeInstance inst;
  for (int t = 0; t < 10; ++t) {
    inst.prices.push_back(84.0);
    inst.renewable_power.push_back(wind(rng));
  }
  const Env env(inst);
  for (const DpGrid& grid : {DpGrid{}, coarse(), DpGrid::exact()}) {
    const OracleResult dp = dp_solve(env, grid);
    CHECK(dp.total_reward == Approx(sell_only_return(inst)).epsilon(1e-12));
    const DispatchSummary s = dp.log.summary();
    CHECK(s.gt_hours == 0);
    CHECK(s.p2g_hours == 0);
    CHECK(s.bes_charge == 0);
    CHECK(bes_only_solve(env, grid).total_reward == Approx(sell_only_return(inst)).epsilon(1e-12));
  }
}

TEST_CASE("one step: brute force picks the best single action") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const EpisodeInstance inst = p2g_test::random_instance(rng, 1);
    const Env env(inst);
    const PlantParams p;
    double best = -1e300;
    for (std::size_t a = 0; a < env.num_actions(); ++a) {
      const Transition tr = simulate_step(initial_plant_state(p), decode_action(a, env.config().actions),
                                          inst.renewable_power[0], inst.prices[0], p);
      best = std::max(best, tr.reward());
    }
    const OracleResult bf = brute_force(env);
    CHECK(bf.total_reward == best);
    CHECK(bf.schedule.size() == 1);
    CHECK(dp_solve(env, DpGrid::exact()).total_reward == best);
  }
}

TEST_CASE("two steps: charging pays off exactly above the break-even price") {
  const PlantParams p;
  const double b = bes_break_even(p, {60.0, 20.0, 0.1}).price;
  for (double offset : {-5.0, 5.0}) {
    EpisodeInstance inst;
    inst.prices = {60.0, b + offset};
    inst.renewable_power = {20.0, 20.0};
    const Env env(inst);
    const OracleResult bf = brute_force(env);
    const bool charged = bf.log.steps[0].p_bes < 0;
    CHECK(charged == (offset > 0));
    CHECK(dp_solve(env, DpGrid::exact()).schedule == bf.schedule);
  }
}

TEST_CASE("exact DP agrees with brute force") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const EpisodeInstance inst =
        trial % 2 ? p2g_test::random_spike_instance(rng, 5) : p2g_test::random_instance(rng, 5);
    const Env env(inst);
    const OracleResult bf = brute_force(env);
    const OracleResult dp = dp_solve(env, DpGrid::exact());
    CHECK(dp.total_reward == bf.total_reward);
    CHECK(dp.value == bf.value);
    CHECK(dp.schedule == bf.schedule);
  }
}

TEST_CASE("battery-only benchmark") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const EpisodeInstance inst = p2g_test::random_instance(rng, 6);
    const Env env(inst);
    const OracleResult bes = bes_only_solve(env, DpGrid::exact());
    CHECK(bes.total_reward <= dp_solve(env, DpGrid::exact()).total_reward);
    for (const StepRecord& r : bes.log.steps) {
      CHECK(r.p_gt == 0.0);
      CHECK(r.p_p2g == 0.0);
    }
  }
  const EpisodeInstance cs1 = generate_cs1(0);
  const Env env(cs1);
  const OracleResult bes = bes_only_solve(env, coarse());
  CHECK(bes.total_reward > sell_only_return(cs1));
  CHECK(bes.total_reward <= dp_solve(env, coarse()).total_reward);
}

TEST_CASE("CS1 optimum stores gas and burns it in the spike") {
  const EpisodeInstance inst = generate_cs1(0);
  const Env env(inst);
  const OracleResult dp = dp_solve(env);
  const DispatchSummary s = dp.log.summary();
  CHECK(s.gt_starts == 1);
  CHECK(s.gt_hours >= 1);
  CHECK(s.p2g_hours >= 5);
  std::size_t first_gt = inst.size(), last_p2g = 0;
  for (const StepRecord& r : dp.log.steps) {
    if (r.p_gt > 0) first_gt = std::min(first_gt, r.t);
    if (r.p_p2g < 0) last_p2g = std::max(last_p2g, r.t);
  }
  CHECK(first_gt >= 22);
  CHECK(last_p2g < first_gt);
  CHECK(dp.total_reward > bes_only_solve(env).total_reward);
}

TEST_CASE("refining the grid loses at most the snap bound") {
  for (std::uint64_t seed : {0, 1}) {
    const EpisodeInstance inst = generate_cs1(seed);
    const Env env(inst);
    const DpGrid base = coarse();
    DpGrid fine = base;
    fine.bes_points = 2 * base.bes_points - 1;
    fine.p2g_points = 2 * base.p2g_points - 1;
    const double bound = snap_bound(env, base).return_bound;
    CHECK(bound > 0);
    CHECK(dp_solve(env, fine).total_reward >= dp_solve(env, base).total_reward - bound);
  }
}

TEST_CASE("grid details") {
  const EpisodeInstance inst = generate_cs1(2);
  const Env env(inst);
  SUBCASE("worker count does not change the result") {
    DpGrid one = coarse(DpGrid::Lookup::Linear), three = one;
    three.workers = 3;
    const OracleResult a = dp_solve(env, one), b = dp_solve(env, three);
    CHECK(a.schedule == b.schedule);
    CHECK(a.value == b.value);
  }
  SUBCASE("re-simulated return matches the replayed log") {
    const OracleResult dp = dp_solve(env, coarse());
    CHECK(replay(env, dp.schedule).summary().total_reward == dp.total_reward);
    CHECK_THROWS(replay(env, {0, 1}));
  }
  SUBCASE("invalid grids") {
    DpGrid g = coarse();
    g.bes_points = 1;
    CHECK_THROWS_AS(dp_solve(env, g), OracleError);
    g = coarse();
    g.gt_hours_cap = 7;
    CHECK_THROWS_AS(dp_solve(env, g), OracleError);
    g = coarse();
    g.memory_budget_bytes = 1024;
    CHECK_THROWS_AS(dp_solve(env, g), OracleError);
  }
  SUBCASE("brute force refuses long horizons") { CHECK_THROWS_AS(brute_force(env), OracleError); }
  SUBCASE("gas grid spans the reachable range") {
    const double hi = reachable_p2g_soc(env);
    CHECK(hi > 0);
    double fuel = 0;
    for (double w : inst.renewable_power)
      if (w >= 12.0) fuel += std::min(w, 30.0) * 0.56 * 158.73;
    CHECK(hi == Approx(fuel / 1e6));
  }
}
