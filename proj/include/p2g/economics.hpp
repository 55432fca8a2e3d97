#pragma once

#include "p2g/plant.hpp"

namespace p2g {

/// Charge the battery from wind for one step, then discharge everything the next step.
struct BesArbitrage {
  double charge_price = 84.0;   // C$/MWh, price of the withheld wind energy
  double charge_power = 20.0;   // MW, magnitude
  double initial_soc = 0.1;
};

struct BesBreakEven {
  double lost_sales = 0.0;       // C$
  double aging_cost = 0.0;       // C$, both legs
  double energy_delivered = 0.0;  // MWh
  double price = 0.0;            // C$/MWh at which the round trip has zero profit
};

BesBreakEven bes_break_even(const PlantParams& params, const BesArbitrage& scenario = {});

/// Run P2G from wind for some steps, then burn the stored gas in one turbine step
/// at the largest setpoint the fuel allows.
struct P2gGtArbitrage {
  int p2g_steps = 5;
  double p2g_power = -30.0;     // MW
  double charge_price = 84.0;   // C$/MWh
  bool startup_derating = false;  // false: the turbine step delivers a full step of energy
};

struct P2gGtBreakEven {
  double fuel = 0.0;             // lbs stored
  double gt_power = 0.0;         // MW setpoint
  double lost_sales = 0.0;       // C$
  double p2g_cost = 0.0;         // C$
  double gt_cost = 0.0;          // C$
  double energy_delivered = 0.0;  // MWh
  double price = 0.0;            // C$/MWh
};

P2gGtBreakEven p2g_gt_break_even(const PlantParams& params, const P2gGtArbitrage& scenario = {});

}  // namespace p2g
