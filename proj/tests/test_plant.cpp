#include "doctest.h"

#include <cmath>
#include <random>

#include "p2g/env.hpp"
#include "p2g/plant.hpp"

using namespace p2g;
using doctest::Approx;

TEST_CASE("battery idle step changes nothing") {
  const PlantParams p;
  const StepOutcome s = bes_step(0.5, 0.0, p);
  CHECK(s.soc == 0.5);
  CHECK(s.power == 0.0);
  CHECK(s.cost == 0.0);
}

TEST_CASE("battery charge and clipped discharge") {
  const PlantParams p;
  const StepOutcome charge = bes_step(0.1, -20.0, p);
  CHECK(charge.soc == Approx(0.1 + 0.92 * 20.0 / 50.0).epsilon(1e-12));
  CHECK(charge.soc == Approx(0.468).epsilon(1e-12));
  CHECK(charge.power == Approx(-20.0).epsilon(1e-12));

  const StepOutcome discharge = bes_step(0.468, 20.0, p);
  CHECK(discharge.soc == Approx(0.1).epsilon(1e-12));
  CHECK(discharge.power == Approx(0.368 * 50.0 * 0.92).epsilon(1e-9));
  CHECK(discharge.power == Approx(16.928).epsilon(1e-9));
}

TEST_CASE("battery charge is clipped at the SOC ceiling") {
  const PlantParams p;
  const StepOutcome s = bes_step(0.85, -20.0, p);
  CHECK(s.soc == Approx(0.9));
  CHECK(s.power == Approx(-0.05 * 50.0 / 0.92));
}

TEST_CASE("aging cost") {
  const PlantParams p;
  CHECK(bes_aging_cost(0.3, 0.3, p) == 0.0);
  const double reference =
      std::abs(std::pow(1 - 0.468, 1.14) - std::pow(1 - 0.1, 1.14)) / (2.0 * 6000.0) * 15'000'000.0;
  CHECK(bes_aging_cost(0.1, 0.468, p) == Approx(reference).epsilon(1e-12));
  CHECK(bes_aging_cost(0.1, 0.468, p) == Approx(499.8).epsilon(1e-4));
  const double cycle = bes_aging_cost(0.1, 0.468, p) + bes_aging_cost(0.468, 0.1, p);
  CHECK(cycle == Approx(999.5).epsilon(1e-4));
}

TEST_CASE("aging cost depends only on the visited SOCs") {
  const PlantParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng);
    CHECK(bes_aging_cost(a, b, p) + bes_aging_cost(b, c, p) >= bes_aging_cost(a, c, p) - 1e-9);
    const double loop = bes_aging_cost(a, b, p) + bes_aging_cost(b, a, p);
    if (a != b) CHECK(loop > 0.0);
    CHECK(bes_aging_cost(a, b, p) == Approx(bes_aging_cost(b, a, p)).epsilon(1e-12));
  }
}

TEST_CASE("battery round trip returns eta_ch * eta_dis of the charged energy") {
  const PlantParams p;
  for (double power : {5.0, 10.0, 17.5, 20.0}) {
    const StepOutcome charge = bes_step(0.1, -power, p);
    double soc = charge.soc;
    double delivered = 0.0;
    while (soc > p.bes_soc_min + 1e-15) {
      const StepOutcome d = bes_step(soc, p.bes_power_max, p);
      delivered += d.power * p.dt;
      soc = d.soc;
    }
    CHECK(delivered == Approx(0.92 * 0.92 * power * p.dt).epsilon(1e-9));
  }
}

TEST_CASE("fuel curve") {
  const PlantParams p;
  CHECK(gt_fuel_rate(0.0, p) == 0.0);
  CHECK(gt_fuel_rate(1.0, p) == Approx(2250.0).epsilon(1e-12));
  CHECK(gt_fuel_rate(32.6, p) == Approx(13936.0).epsilon(1e-12));
  CHECK(gt_fuel_rate(0.5, p) == Approx(700 * 0.5 + 1550).epsilon(1e-12));
  CHECK(gt_fuel_rate(std::nextafter(1.0, 2.0), p) == Approx(2560.0).epsilon(1e-9));
  double prev = gt_fuel_rate(1e-6, p);
  for (double x = 0.01; x <= 1.0; x += 0.01) {
    CHECK(gt_fuel_rate(x, p) >= prev);
    prev = gt_fuel_rate(x, p);
  }
  prev = gt_fuel_rate(1.0 + 1e-9, p);
  for (double x = 1.1; x <= 32.6; x += 0.1) {
    CHECK(gt_fuel_rate(x, p) >= prev);
    prev = gt_fuel_rate(x, p);
  }
}

TEST_CASE("turbine steps") {
  const PlantParams p;
  SUBCASE("off stays off") {
    const StepOutcome s = gt_step({}, 0.0, 1e6, p);
    CHECK(s.status == GtStatus{});
    CHECK(s.power == 0.0);
    CHECK(s.fuel == 0.0);
    CHECK(s.cost == 0.0);
  }
  SUBCASE("start at full power") {
    const StepOutcome s = gt_step({}, 32.6, 1e6, p);
    CHECK(s.power * p.dt == Approx(32.6 * 40.0 / 60.0).epsilon(1e-12));
    CHECK(s.fuel == Approx(1200.0 / 3.0 + 13936.0 * 2.0 / 3.0).epsilon(1e-12));
    CHECK(s.fuel == Approx(9690.7).epsilon(1e-5));
    CHECK(s.cost == Approx(33'000'000.0 / 26'000.0).epsilon(1e-12));
    CHECK(s.status.mode == GtMode::StartedRecently);
    CHECK(s.status.run_hours == 1);
  }
  SUBCASE("long-running hour pays the operating charge") {
    const StepOutcome s = gt_step({GtMode::RunningLong, 8}, 32.6, 1e6, p);
    CHECK(s.status.run_hours == 9);
    CHECK(s.status.mode == GtMode::RunningLong);
    CHECK(s.cost == Approx(165.0).epsilon(1e-12));
    CHECK(s.fuel == Approx(13936.0).epsilon(1e-12));
  }
  SUBCASE("fuel shortage reduces power") {
    const double fuel = 5000.0;
    const StepOutcome s = gt_step({GtMode::StartedRecently, 2}, 32.6, fuel, p);
    CHECK(s.fuel <= fuel);
    CHECK(s.power == Approx((fuel - 2200.0) / 360.0).epsilon(1e-9));
  }
}

TEST_CASE("turbine maintenance charges against a reference counter") {
  const PlantParams p;
  std::mt19937_64 rng(11);
  std::bernoulli_distribution on(0.7);
  for (int trial = 0; trial < 50; ++trial) {
    GtStatus status;
    int hours = 0;
    int starts = 0, oper_hours = 0, ref_starts = 0, ref_oper_hours = 0;
    for (int t = 0; t < 200; ++t) {
      const bool run = on(rng);
      const StepOutcome s = gt_step(status, run ? 20.0 : 0.0, 1e9, p);
      if (run) {
        if (hours == 0) {
          ++ref_starts;
          hours = 1;
        } else {
          ++hours;
          if (hours > 200000.0 / 26000.0) ++ref_oper_hours;
        }
      } else {
        hours = 0;
      }
      if (s.cost == Approx(p.k_cycle())) ++starts;
      if (s.cost == Approx(p.k_oper())) ++oper_hours;
      CHECK(s.status.run_hours == hours);
      status = s.status;
    }
    CHECK(starts == ref_starts);
    CHECK(oper_hours == ref_oper_hours);
  }
}

TEST_CASE("power-to-gas steps") {
  const PlantParams p;
  SUBCASE("off") {
    const StepOutcome s = p2g_step(0.3, 0.0, p);
    CHECK(s.soc == 0.3);
    CHECK(s.fuel == 0.0);
    CHECK(s.cost == 0.0);
  }
  SUBCASE("full power from empty") {
    const StepOutcome s = p2g_step(0.0, -30.0, p);
    CHECK(s.fuel == Approx(30 * 0.56 * 158.73).epsilon(1e-12));
    CHECK(s.fuel == Approx(2666.7).epsilon(1e-4));
    CHECK(s.soc == Approx(0.0026667).epsilon(1e-4));
    CHECK(s.cost == Approx(300 + 30 * 0.56 * 158.73 * 0.45359237 * 0.03375).epsilon(1e-12));
    CHECK(s.cost == Approx(340.8).epsilon(1e-4));
  }
  SUBCASE("nearly full store forces the unit off") {
    const StepOutcome s = p2g_step(0.999, -30.0, p);
    CHECK(s.fuel == 0.0);
    CHECK(s.power == 0.0);
    CHECK(s.cost == 0.0);
    CHECK(s.soc == 0.999);
  }
  SUBCASE("headroom above minimum load clips the power") {
    const StepOutcome s = p2g_step(0.998, -30.0, p);
    CHECK(s.fuel == Approx(2000.0).epsilon(1e-9));
    CHECK(s.soc == 1.0);
    CHECK(-s.power == Approx(2000.0 / (0.56 * 158.73)).epsilon(1e-12));
  }
  SUBCASE("inside the forbidden band") { CHECK_THROWS_AS(p2g_step(0.0, -5.0, p), std::domain_error); }
}

TEST_CASE("random dispatch keeps SOC bounds and conserves fuel") {
  const PlantParams p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> wind(0.0, 31.5);
  std::uniform_int_distribution<int> pick(0, 2);
  const double gt_levels[] = {0.0, 10.0, 32.6};
  const double p2g_levels[] = {0.0, -12.0, -30.0};
  const double bes_levels[] = {-20.0, 0.0, 20.0};
  for (int episode = 0; episode < 20; ++episode) {
    PlantState s = initial_plant_state(p);
    double generated = 0.0, burnt = 0.0;
    for (int t = 0; t < 500; ++t) {
      const Setpoints req{gt_levels[pick(rng)], p2g_levels[pick(rng)], bes_levels[pick(rng)]};
      const Transition tr = simulate_step(s, req, wind(rng), 100.0, p);
      generated += tr.fuel_generated;
      burnt += tr.fuel_burnt;
      s = tr.next;
      CHECK(s.soc_bes >= 0.1 - 1e-12);
      CHECK(s.soc_bes <= 0.9 + 1e-12);
      CHECK(s.soc_p2g >= 0.0);
      CHECK(s.soc_p2g <= 1.0);
      CHECK(s.soc_p2g * p.p2g_capacity == Approx(generated - burnt).epsilon(1e-9).scale(1.0));
    }
  }
}
