#pragma once

#include <string>

namespace p2g {

/// Constants of the battery, gas turbine and power-to-gas devices.
///
/// Sign conventions follow the grid: charging and P2G consumption are
/// negative powers, discharging and GT output are positive. P2G storage is
/// measured in pounds of synthetic natural gas.
struct PlantParams {
  // battery
  double bes_capacity = 50.0;  // MWh
  double bes_soc_min = 0.1;
  double bes_soc_max = 0.9;
  double bes_power_min = -20.0;  // MW, charge
  double bes_power_max = 20.0;   // MW, discharge
  double eta_ch = 0.92;
  double eta_dis = 0.92;
  double peukert_kp = 1.14;
  double cycles_to_failure = 6000.0;
  double bes_investment_per_mwh = 300000.0;  // C$/MWh

  // gas turbine
  double gt_power_max = 32.6;  // MW
  double gt_life_cycles = 26000.0;
  double gt_life_hours = 200000.0;
  double gt_lifetime_om_cost = 33000000.0;  // C$
  double startup_minutes = 20.0;
  double startup_fuel_rate = 1200.0;  // lbs/h

  // piecewise-linear fuel curve, lbs/h as a function of MW
  double fuel_breakpoint = 1.0;
  double fuel_low_slope = 700.0;
  double fuel_low_intercept = 1550.0;
  double fuel_high_slope = 360.0;
  double fuel_high_intercept = 2200.0;

  // power-to-gas
  double p2g_capacity = 1000000.0;  // lbs
  double p2g_power_min = -12.0;     // MW, smallest consumption when on
  double p2g_power_max = -30.0;     // MW, largest consumption
  double eta_p2g = 0.56;
  double alpha_p2g = 158.73;  // lbs/MWh
  double k_p2g_fix = 300.0;   // C$/h
  double k_p2g_var = 0.03375;  // C$/kg
  double kg_per_lb = 0.45359237;

  double dt = 1.0;  // h

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  double bes_investment() const { return bes_investment_per_mwh * bes_capacity; }
  double k_cycle() const { return gt_lifetime_om_cost / gt_life_cycles; }
  double k_oper() const { return gt_lifetime_om_cost / gt_life_hours; }
  /// Run hours after which the per-hour maintenance charge applies.
  double gt_oper_threshold_hours() const { return gt_life_hours / gt_life_cycles; }
  /// Fraction of a step spent starting up, in [0, 1].
  double startup_fraction() const;
  /// Fuel generated per hour at |P| MW of P2G consumption.
  double p2g_fuel_per_mw() const { return eta_p2g * alpha_p2g * dt; }
};

enum class GtMode { Off = 0, StartedRecently = 1, RunningLong = 2 };

struct GtStatus {
  GtMode mode = GtMode::Off;
  int run_hours = 0;  // steps since the last start, 0 when off

  bool on() const { return mode != GtMode::Off; }
  friend bool operator==(const GtStatus&, const GtStatus&) = default;
};

/// Result of one device step. `soc` is meaningful for the storages,
/// `status` for the turbine.
struct StepOutcome {
  double soc = 0.0;
  GtStatus status{};
  double power = 0.0;  // effective MW over the step
  double fuel = 0.0;   // lbs generated (P2G) or burnt (GT)
  double cost = 0.0;   // C$
};

/// Cyclic aging cost of moving the battery between two SOCs.
double bes_aging_cost(double soc_prev, double soc_new, const PlantParams& params);

StepOutcome bes_step(double soc, double requested_power, const PlantParams& params);

/// Fuel flow in lbs/h. Branch boundary belongs to the low branch.
double gt_fuel_rate(double power, const PlantParams& params);

/// Fuel in lbs drawn over one step at `power`, with start-up correction when
/// `starting` is set.
double gt_step_fuel(double power, bool starting, const PlantParams& params);

struct GtLimit {
  double power = 0.0;
  bool exhausts = false;  // the setpoint burns exactly the available fuel
};

/// Largest setpoint in [0, P_max] whose step fuel fits in `fuel_available`.
GtLimit gt_max_power(bool starting, double fuel_available, const PlantParams& params);

StepOutcome gt_step(const GtStatus& status, double requested_power, double fuel_available,
                    const PlantParams& params);

StepOutcome p2g_step(double soc, double requested_power, const PlantParams& params);

std::string to_string(GtMode mode);

}  // namespace p2g
