#include "p2g/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace p2g {

namespace {

constexpr double kTol = 1e-9;

void require(bool condition, const char* what) {
  if (!condition) throw std::invalid_argument(std::string("PlantParams: ") + what);
}

}  // namespace

void PlantParams::validate() const {
  require(bes_capacity > 0, "bes_capacity must be positive");
  require(bes_soc_min >= 0 && bes_soc_min < bes_soc_max && bes_soc_max <= 1,
          "need 0 <= bes_soc_min < bes_soc_max <= 1");
  require(bes_power_min < 0 && bes_power_max > 0, "need bes_power_min < 0 < bes_power_max");
  require(eta_ch > 0 && eta_ch <= 1, "eta_ch must lie in (0,1]");
  require(eta_dis > 0 && eta_dis <= 1, "eta_dis must lie in (0,1]");
  require(peukert_kp > 0, "peukert_kp must be positive");
  require(cycles_to_failure > 0, "cycles_to_failure must be positive");
  require(bes_investment_per_mwh >= 0, "bes_investment_per_mwh must be nonnegative");
  require(gt_power_max > 0, "gt_power_max must be positive");
  require(gt_life_cycles > 0 && gt_life_hours > 0, "GT lifetimes must be positive");
  require(gt_lifetime_om_cost >= 0, "gt_lifetime_om_cost must be nonnegative");
  require(startup_minutes >= 0 && startup_fuel_rate >= 0, "start-up constants must be nonnegative");
  require(fuel_breakpoint > 0, "fuel_breakpoint must be positive");
  require(fuel_low_slope >= 0 && fuel_high_slope >= 0, "fuel curve slopes must be nonnegative");
  require(fuel_low_intercept >= 0 && fuel_high_intercept >= 0,
          "fuel curve intercepts must be nonnegative");
  require(p2g_capacity > 0, "p2g_capacity must be positive");
  require(p2g_power_max < p2g_power_min && p2g_power_min < 0,
          "need p2g_power_max < p2g_power_min < 0");
  require(eta_p2g > 0 && eta_p2g <= 1, "eta_p2g must lie in (0,1]");
  require(alpha_p2g > 0, "alpha_p2g must be positive");
  require(k_p2g_fix >= 0 && k_p2g_var >= 0, "P2G cost factors must be nonnegative");
  require(kg_per_lb > 0, "kg_per_lb must be positive");
  require(dt > 0, "dt must be positive");
}

double PlantParams::startup_fraction() const {
  return std::clamp(startup_minutes / (60.0 * dt), 0.0, 1.0);
}

std::string to_string(GtMode mode) {
  switch (mode) {
    case GtMode::Off: return "off";
    case GtMode::StartedRecently: return "started_recently";
    case GtMode::RunningLong: return "running_long";
  }
  return "unknown";
}

double bes_aging_cost(double soc_prev, double soc_new, const PlantParams& p) {
  const double dod_prev = std::pow(1.0 - soc_prev, p.peukert_kp);
  const double dod_new = std::pow(1.0 - soc_new, p.peukert_kp);
  return std::abs(dod_new - dod_prev) / (2.0 * p.cycles_to_failure) * p.bes_investment();
}

StepOutcome bes_step(double soc, double requested_power, const PlantParams& p) {
  if (requested_power < p.bes_power_min - kTol || requested_power > p.bes_power_max + kTol)
    throw std::domain_error("bes_step: requested power outside [bes_power_min, bes_power_max]");
  if (soc < p.bes_soc_min - kTol || soc > p.bes_soc_max + kTol)
    throw std::domain_error("bes_step: soc outside [bes_soc_min, bes_soc_max]");

  StepOutcome out;
  out.soc = soc;
  if (requested_power < 0) {
    double gain = -p.eta_ch * requested_power * p.dt / p.bes_capacity;
    if (soc + gain >= p.bes_soc_max) {
      gain = std::max(0.0, p.bes_soc_max - soc);
      out.soc = p.bes_soc_max;
    } else {
      out.soc = soc + gain;
    }
    out.power = -gain * p.bes_capacity / (p.eta_ch * p.dt);
  } else if (requested_power > 0) {
    double deduction = requested_power * p.dt / p.bes_capacity;
    if (soc - deduction <= p.bes_soc_min) {
      deduction = std::max(0.0, soc - p.bes_soc_min);
      out.soc = p.bes_soc_min;
    } else {
      out.soc = soc - deduction;
    }
    out.power = deduction * p.bes_capacity * p.eta_dis / p.dt;
  }
  out.cost = bes_aging_cost(soc, out.soc, p);
  return out;
}

double gt_fuel_rate(double power, const PlantParams& p) {
  if (power < -kTol || power > p.gt_power_max + kTol)
    throw std::domain_error("gt_fuel_rate: power outside [0, gt_power_max]");
  if (power <= 0) return 0.0;
  if (power <= p.fuel_breakpoint) return p.fuel_low_slope * power + p.fuel_low_intercept;
  return p.fuel_high_slope * power + p.fuel_high_intercept;
}

double gt_step_fuel(double power, bool starting, const PlantParams& p) {
  if (power <= 0) return 0.0;
  if (!starting) return gt_fuel_rate(power, p) * p.dt;
  const double f = p.startup_fraction();
  return (p.startup_fuel_rate * f + gt_fuel_rate(power, p) * (1.0 - f)) * p.dt;
}

GtLimit gt_max_power(bool starting, double fuel_available, const PlantParams& p) {
  if (fuel_available <= 0) return {};
  if (gt_step_fuel(p.gt_power_max, starting, p) <= fuel_available) return {p.gt_power_max, false};

  // Fuel budget available for the fuel curve, in lbs/h over the running part of the step.
  double budget = fuel_available / p.dt;
  if (starting) {
    const double f = p.startup_fraction();
    if (f >= 1.0) return {};
    budget = (budget - p.startup_fuel_rate * f) / (1.0 - f);
  }
  if (p.fuel_high_slope > 0) {
    const double high = (budget - p.fuel_high_intercept) / p.fuel_high_slope;
    if (high > p.fuel_breakpoint) return {std::min(high, p.gt_power_max), true};
  }
  if (budget >= p.fuel_low_slope * p.fuel_breakpoint + p.fuel_low_intercept)
    return {p.fuel_breakpoint, false};
  if (p.fuel_low_slope > 0) {
    const double low = (budget - p.fuel_low_intercept) / p.fuel_low_slope;
    if (low > 0) return {low, true};
  }
  return {};
}

StepOutcome gt_step(const GtStatus& status, double requested_power, double fuel_available,
                    const PlantParams& p) {
  if (requested_power < -kTol || requested_power > p.gt_power_max + kTol)
    throw std::domain_error("gt_step: requested power outside [0, gt_power_max]");

  StepOutcome out;
  double power = std::clamp(requested_power, 0.0, p.gt_power_max);
  const bool starting = !status.on();
  if (power > 0) {
    double fuel = gt_step_fuel(power, starting, p);
    if (fuel > fuel_available) {
      const GtLimit limit = gt_max_power(starting, fuel_available, p);
      power = limit.power;
      fuel = limit.exhausts ? fuel_available : gt_step_fuel(power, starting, p);
    }
    if (power > 0 && std::abs(fuel - fuel_available) <= kTol * std::max(1.0, fuel_available))
      fuel = fuel_available;
    out.fuel = power > 0 ? fuel : 0.0;
  }
  if (power <= 0) {
    out.status = GtStatus{};
    return out;
  }

  if (starting) {
    out.status = GtStatus{GtMode::StartedRecently, 1};
    out.power = power * (1.0 - p.startup_fraction());
    out.cost = p.k_cycle();
  } else {
    out.status.run_hours = status.run_hours + 1;
    out.power = power;
    if (out.status.run_hours * p.dt > p.gt_oper_threshold_hours()) {
      out.status.mode = GtMode::RunningLong;
      out.cost = p.k_oper();
    } else {
      out.status.mode = GtMode::StartedRecently;
    }
  }
  return out;
}

StepOutcome p2g_step(double soc, double requested_power, const PlantParams& p) {
  if (requested_power > kTol || requested_power < p.p2g_power_max - kTol ||
      (requested_power < 0 && requested_power > p.p2g_power_min + kTol))
    throw std::domain_error("p2g_step: requested power must be 0 or within [p2g_power_max, p2g_power_min]");

  StepOutcome out;
  out.soc = soc;
  if (requested_power >= 0) return out;

  const double headroom = std::max(0.0, (1.0 - soc) * p.p2g_capacity);
  double fuel = -requested_power * p.p2g_fuel_per_mw();
  bool full = false;
  if (fuel >= headroom) {
    fuel = headroom;
    full = true;
  }
  const double power = -fuel / p.p2g_fuel_per_mw();
  if (power > p.p2g_power_min + kTol) return out;  // minimum load does not fit

  out.soc = full ? 1.0 : soc + fuel / p.p2g_capacity;
  out.power = power;
  out.fuel = fuel;
  out.cost = p.k_p2g_fix * p.dt + fuel * p.kg_per_lb * p.k_p2g_var;
  return out;
}

}  // namespace p2g
