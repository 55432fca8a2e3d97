#pragma once

#include <optional>
#include <span>

namespace p2g {

/// Training-time reward modifications aimed at the delayed payoff of gas storage.
/// Each part is toggled independently; enabled parts add up.
struct ShapingConfig {
  struct SocPenalty {
    bool enabled = false;
    double weight = 1000.0;  // C$ per step at an empty store
    double soc_limit = 0.01;  // no penalty at or above this gas SOC
    friend bool operator==(const SocPenalty&, const SocPenalty&) = default;
  };
  struct InactivityPenalty {
    bool enabled = false;
    double weight = 1000.0;
    double threshold = 0.7;  // fraction of the running mean price
    double rate = 0.02;      // running-mean update rate
    std::optional<double> initial_mean;  // unset: mean of the first 24 prices
    friend bool operator==(const InactivityPenalty&, const InactivityPenalty&) = default;
  };
  struct CostAttribution {
    bool enabled = false;
    friend bool operator==(const CostAttribution&, const CostAttribution&) = default;
  };

  SocPenalty soc_penalty;
  InactivityPenalty inactivity;
  CostAttribution cost_attribution;

  bool any() const { return soc_penalty.enabled || inactivity.enabled || cost_attribution.enabled; }
  void validate() const;
  friend bool operator==(const ShapingConfig&, const ShapingConfig&) = default;
};

/// P2G costs and lost sales withheld until the stored gas is burnt.
struct AttributionLedger {
  double sum_cost = 0.0;
  double sum_lost_sales = 0.0;
};

struct ShapingState {
  AttributionLedger ledger;
  double running_mean_price = 0.0;
};

/// Mean of the first `window` prices, the seed of the inactivity running mean.
double initial_mean_price(std::span<const double> prices, std::size_t window = 24);

double soc_penalty(double soc_p2g, const ShapingConfig::SocPenalty& config);

/// Advances the running mean and returns the penalty for this step (0 or the weight).
double inactivity_penalty_step(double price, double p_p2g, double p_re, double p2g_min_power_magnitude,
                               double& running_mean, const ShapingConfig::InactivityPenalty& config);

struct AttributionDelta {
  double reward_delta = 0.0;  // added to the step reward
  double c_p2g = 0.0;         // P2G cost as seen by the shaped reward
};

/// P2G running: withhold its cost and compensate the lost sales.
AttributionDelta attribution_on_charge(double c_p2g, double p_p2g, double price, double dt,
                                       AttributionLedger& ledger);

/// Gas burnt: release the ledger share proportional to the SOC drawn.
AttributionDelta attribution_on_discharge(double soc_prev, double soc_new, AttributionLedger& ledger);

}  // namespace p2g
