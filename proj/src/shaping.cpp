#include "p2g/shaping.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace p2g {

void ShapingConfig::validate() const {
  if (soc_penalty.weight < 0 || inactivity.weight < 0)
    throw std::invalid_argument("shaping: penalty weights must be nonnegative");
  if (!(soc_penalty.soc_limit > 0 && soc_penalty.soc_limit <= 1))
    throw std::invalid_argument("shaping: soc_limit must lie in (0,1]");
  if (!(inactivity.threshold > 0 && inactivity.threshold <= 1))
    throw std::invalid_argument("shaping: threshold must lie in (0,1]");
  if (!(inactivity.rate > 0 && inactivity.rate <= 1))
    throw std::invalid_argument("shaping: rate must lie in (0,1]");
}

double initial_mean_price(std::span<const double> prices, std::size_t window) {
  const std::size_t n = std::min(window, prices.size());
  if (n == 0) return 0.0;
  return std::accumulate(prices.begin(), prices.begin() + static_cast<std::ptrdiff_t>(n), 0.0) /
         static_cast<double>(n);
}

double soc_penalty(double soc_p2g, const ShapingConfig::SocPenalty& config) {
  return config.weight * std::max((config.soc_limit - soc_p2g) / config.soc_limit, 0.0);
}

double inactivity_penalty_step(double price, double p_p2g, double p_re, double p2g_min_power_magnitude,
                               double& running_mean, const ShapingConfig::InactivityPenalty& config) {
  running_mean += config.rate * (price - running_mean);
  const double threshold = running_mean * config.threshold;
  if (price <= threshold && p_p2g == 0.0 && p_re >= p2g_min_power_magnitude) return config.weight;
  return 0.0;
}

AttributionDelta attribution_on_charge(double c_p2g, double p_p2g, double price, double dt,
                                       AttributionLedger& ledger) {
  if (!(p_p2g < 0)) return {0.0, c_p2g};
  ledger.sum_cost += c_p2g;
  const double compensation = -p_p2g * price * dt;
  ledger.sum_lost_sales += compensation;
  // The withheld cost no longer reduces the reward.
  return {compensation + c_p2g, 0.0};
}

AttributionDelta attribution_on_discharge(double soc_prev, double soc_new, AttributionLedger& ledger) {
  if (!(soc_prev > 0)) throw std::logic_error("attribution_on_discharge: fuel drawn from an empty store");
  const double rho = soc_new <= 0 ? 1.0 : std::clamp((soc_prev - soc_new) / soc_prev, 0.0, 1.0);
  double cost = ledger.sum_cost * rho;
  double compensation = ledger.sum_lost_sales * rho;
  if (rho == 1.0) {
    cost = ledger.sum_cost;
    compensation = ledger.sum_lost_sales;
    ledger = {};
  } else {
    ledger.sum_cost -= cost;
    ledger.sum_lost_sales -= compensation;
  }
  return {-(cost + compensation), cost};
}

}  // namespace p2g
