#include "p2g/economics.hpp"

#include <stdexcept>

namespace p2g {

BesBreakEven bes_break_even(const PlantParams& p, const BesArbitrage& s) {
  p.validate();
  const StepOutcome charge = bes_step(s.initial_soc, -s.charge_power, p);
  const StepOutcome discharge = bes_step(charge.soc, p.bes_power_max, p);
  BesBreakEven r;
  r.lost_sales = -charge.power * p.dt * s.charge_price;
  r.aging_cost = charge.cost + discharge.cost;
  r.energy_delivered = discharge.power * p.dt;
  // Continue to the floor if one step is not enough.
  double soc = discharge.soc;
  while (soc > p.bes_soc_min) {
    const StepOutcome more = bes_step(soc, p.bes_power_max, p);
    if (more.soc == soc) break;
    r.aging_cost += more.cost;
    r.energy_delivered += more.power * p.dt;
    soc = more.soc;
  }
  if (!(r.energy_delivered > 0)) throw std::domain_error("bes_break_even: nothing to discharge");
  r.price = (r.lost_sales + r.aging_cost) / r.energy_delivered;
  return r;
}

P2gGtBreakEven p2g_gt_break_even(const PlantParams& params, const P2gGtArbitrage& s) {
  params.validate();
  if (s.p2g_steps < 1) throw std::invalid_argument("p2g_gt_break_even: p2g_steps must be >= 1");
  PlantParams p = params;
  if (!s.startup_derating) p.startup_minutes = 0.0;

  P2gGtBreakEven r;
  double soc = 0.0;
  for (int k = 0; k < s.p2g_steps; ++k) {
    const StepOutcome step = p2g_step(soc, s.p2g_power, p);
    soc = step.soc;
    r.fuel += step.fuel;
    r.p2g_cost += step.cost;
    r.lost_sales += -step.power * p.dt * s.charge_price;
  }
  const GtLimit limit = gt_max_power(true, r.fuel, p);
  if (!(limit.power > 0)) throw std::domain_error("p2g_gt_break_even: stored fuel cannot run the turbine");
  const StepOutcome gt = gt_step(GtStatus{}, limit.power, r.fuel, p);
  r.gt_power = limit.power;
  r.gt_cost = gt.cost;
  r.energy_delivered = gt.power * p.dt;
  r.price = (r.lost_sales + r.p2g_cost + r.gt_cost) / r.energy_delivered;
  return r;
}

}  // namespace p2g
