#include "doctest.h"

#include <cmath>
#include <random>

#include "p2g/data.hpp"
#include "p2g/env.hpp"
#include "p2g/shaping.hpp"

using namespace p2g;
using doctest::Approx;

TEST_CASE("SOC penalty") {
  const ShapingConfig::SocPenalty cfg{true, 1000.0, 0.01};
  CHECK(soc_penalty(0.01, cfg) == 0.0);
  CHECK(soc_penalty(0.5, cfg) == 0.0);
  CHECK(soc_penalty(0.0, cfg) == Approx(1000.0));
  CHECK(soc_penalty(0.005, cfg) == Approx(500.0));
}

TEST_CASE("inactivity penalty") {
  ShapingConfig::InactivityPenalty cfg;
  cfg.enabled = true;
  double mean = 100.0;
  SUBCASE("cheap hour with enough wind and idle P2G") {
    CHECK(inactivity_penalty_step(60.0, 0.0, 15.0, 12.0, mean, cfg) == 1000.0);
    CHECK(mean == Approx(99.2));
  }
  SUBCASE("not enough wind to run P2G") { CHECK(inactivity_penalty_step(60.0, 0.0, 10.0, 12.0, mean, cfg) == 0.0); }
  SUBCASE("P2G running") { CHECK(inactivity_penalty_step(60.0, -30.0, 15.0, 12.0, mean, cfg) == 0.0); }
  SUBCASE("price above threshold") { CHECK(inactivity_penalty_step(90.0, 0.0, 15.0, 12.0, mean, cfg) == 0.0); }
}

TEST_CASE("running mean matches the closed-form exponential average") {
  ShapingConfig::InactivityPenalty cfg;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-20.0, 500.0);
  std::vector<double> prices(300);
  for (double& x : prices) x = u(rng);
  const double m0 = 84.0;
  double mean = m0;
  for (double x : prices) inactivity_penalty_step(x, 0.0, 0.0, 12.0, mean, cfg);
  const double a = cfg.rate;
  const std::size_t n = prices.size();
  double reference = std::pow(1 - a, static_cast<double>(n)) * m0;
  for (std::size_t k = 0; k < n; ++k) reference += a * std::pow(1 - a, static_cast<double>(n - 1 - k)) * prices[k];
  CHECK(mean == Approx(reference).epsilon(1e-12));
}

TEST_CASE("attribution while charging") {
  AttributionLedger ledger;
  SUBCASE("one step") {
    const AttributionDelta d = attribution_on_charge(340.8, -30.0, 50.0, 1.0, ledger);
    CHECK(ledger.sum_lost_sales == Approx(1500.0));
    CHECK(ledger.sum_cost == Approx(340.8));
    CHECK(d.c_p2g == 0.0);
    CHECK(d.reward_delta == Approx(1500.0 + 340.8));
  }
  SUBCASE("idle is a no-op") {
    const AttributionDelta d = attribution_on_charge(0.0, 0.0, 50.0, 1.0, ledger);
    CHECK(d.reward_delta == 0.0);
    CHECK(ledger.sum_cost == 0.0);
    CHECK(ledger.sum_lost_sales == 0.0);
  }
  SUBCASE("steps add up") {
    attribution_on_charge(340.8, -30.0, 50.0, 1.0, ledger);
    attribution_on_charge(200.0, -20.0, 10.0, 1.0, ledger);
    CHECK(ledger.sum_lost_sales == Approx(1700.0));
    CHECK(ledger.sum_cost == Approx(540.8));
  }
}

TEST_CASE("attribution while burning") {
  AttributionLedger ledger{400.0, 2000.0};
  SUBCASE("half the store") {
    const AttributionDelta d = attribution_on_discharge(0.02, 0.01, ledger);
    CHECK(d.c_p2g == Approx(200.0));
    CHECK(d.reward_delta == Approx(-1200.0));
    CHECK(ledger.sum_cost == Approx(200.0));
    CHECK(ledger.sum_lost_sales == Approx(1000.0));
  }
  SUBCASE("everything") {
    const AttributionDelta d = attribution_on_discharge(0.02, 0.0, ledger);
    CHECK(d.reward_delta == Approx(-2400.0));
    CHECK(ledger.sum_cost == 0.0);
    CHECK(ledger.sum_lost_sales == 0.0);
  }
  SUBCASE("empty store") { CHECK_THROWS(attribution_on_discharge(0.0, 0.0, ledger)); }
}

TEST_CASE("initial running mean is the mean of the first day") {
  std::vector<double> prices(48, 10.0);
  for (std::size_t t = 0; t < 24; ++t) prices[t] = static_cast<double>(t);
  CHECK(initial_mean_price(prices) == Approx(11.5));
  const std::vector<double> short_series{1.0, 2.0, 6.0};
  CHECK(initial_mean_price(short_series) == Approx(3.0));
}

TEST_CASE("penalties leave the dispatch economics unchanged") {
  const EpisodeInstance inst = generate_cs1(3);
  ShapingConfig shaping;
  shaping.soc_penalty.enabled = true;
  shaping.inactivity.enabled = true;
  Env shaped(inst, {}, {}, shaping), bare(inst);
  shaped.reset();
  bare.reset();
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> pick(0, 11);
  for (std::size_t t = 0; t < inst.size(); ++t) {
    const std::size_t a = pick(rng);
    const StepRecord rs = shaped.step(a).record, rb = bare.step(a).record;
    CHECK(rs.economic_reward() == rb.economic_reward());
    CHECK(rs.p_grid == rb.p_grid);
    CHECK(rs.soc_p2g == rb.soc_p2g);
  }
}

TEST_CASE("configured starting mean overrides the first-day mean") {
  EpisodeInstance inst;
  inst.prices.assign(4, 50.0);
  inst.renewable_power.assign(4, 20.0);
  ShapingConfig shaping;
  shaping.inactivity.enabled = true;
  shaping.inactivity.initial_mean = 200.0;
  Env env(inst, {}, {}, shaping);
  env.reset();
  CHECK(env.state().shaping.running_mean_price == 200.0);
  // 50 is far below 0.7 of the mean: idle P2G is penalized.
  CHECK(env.step(ActionIndices{0, 1, 1}).record.shaping_delta == -1000.0);
}
