#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "p2g/data.hpp"
#include "p2g/plant.hpp"
#include "p2g/shaping.hpp"

namespace p2g {

/// Discrete setpoint levels per device. Joint index is
/// `((i_gt * |p2g|) + i_p2g) * |bes| + i_bes`.
struct ActionSpec {
  std::vector<double> gt_levels{0.0, 32.6};
  std::vector<double> p2g_levels{-30.0, 0.0};
  std::vector<double> bes_levels{-20.0, 0.0, 20.0};

  std::size_t size() const { return gt_levels.size() * p2g_levels.size() * bes_levels.size(); }
  std::array<std::size_t, 3> head_sizes() const {
    return {gt_levels.size(), p2g_levels.size(), bes_levels.size()};
  }
  void validate(const PlantParams& params) const;
  friend bool operator==(const ActionSpec&, const ActionSpec&) = default;
};

struct ActionIndices {
  std::size_t gt = 0;
  std::size_t p2g = 0;
  std::size_t bes = 0;
  friend bool operator==(const ActionIndices&, const ActionIndices&) = default;
};

struct Setpoints {
  double gt = 0.0;   // MW, >= 0
  double p2g = 0.0;  // MW, <= 0
  double bes = 0.0;  // MW, charge negative
  friend bool operator==(const Setpoints&, const Setpoints&) = default;
};

std::size_t joint_index(const ActionIndices& a, const ActionSpec& spec);
ActionIndices split_index(std::size_t joint, const ActionSpec& spec);
Setpoints decode_action(const ActionIndices& a, const ActionSpec& spec);
Setpoints decode_action(std::size_t joint, const ActionSpec& spec);

/// Joint indices ordered by total requested |power|, then by index. Used to
/// break ties between equally good actions.
std::vector<std::size_t> least_intervention_order(const ActionSpec& spec);

struct PlantState {
  double soc_bes = 0.1;
  double soc_p2g = 0.0;
  GtStatus gt{};
  friend bool operator==(const PlantState&, const PlantState&) = default;
};

PlantState initial_plant_state(const PlantParams& params);

/// Maps requested setpoints to the nearest feasible ones, in the order
/// P2G, BES, GT, shrinking each toward zero. Gas produced in the same step is
/// not available to the turbine.
Setpoints project_action(const Setpoints& requested, const PlantState& state, double p_re,
                         const PlantParams& params);

/// Economic outcome of one step through the device models.
struct Transition {
  Setpoints projected;
  PlantState next;
  double p_bes = 0.0;  // effective
  double p_gt = 0.0;   // effective
  double p_p2g = 0.0;  // effective
  double p_grid = 0.0;
  double revenue = 0.0;
  double c_bes = 0.0;
  double c_gt = 0.0;
  double c_p2g = 0.0;
  double fuel_generated = 0.0;
  double fuel_burnt = 0.0;
  bool gt_started = false;

  double reward() const { return revenue - c_bes - c_gt - c_p2g; }
};

Transition simulate_step(const PlantState& state, const Setpoints& requested, double p_re, double price,
                         const PlantParams& params);

enum class TemporalFeature { HourOfDay, WeekOfYear, MonthOfYear };

std::string to_string(TemporalFeature feature);
TemporalFeature temporal_feature_from_string(const std::string& name);

/// Period and counter of one temporal feature at `epoch_seconds`.
std::pair<double, double> temporal_counter(TemporalFeature feature, std::int64_t epoch_seconds);

struct EnvConfig {
  ActionSpec actions;
  double wind_capacity = 31.5;  // MW, power scale
  double price_scale = 1000.0;  // C$/MWh
  double p2g_soc_scale = 1.0;   // gas SOC feature is soc_p2g / p2g_soc_scale
  std::vector<TemporalFeature> temporal;
  std::vector<int> forecast_horizons;  // steps ahead, empty = no forecasts

  static std::vector<int> default_forecast_horizons() { return {1, 2, 3, 6, 12, 18, 24}; }
  void validate(const PlantParams& params) const;
  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

struct StepRecord {
  std::size_t t = 0;
  std::size_t action = 0;  // joint index
  double p_re = 0.0;
  double price = 0.0;
  Setpoints projected;
  double p_bes = 0.0;
  double p_gt = 0.0;
  double p_p2g = 0.0;
  double p_grid = 0.0;
  double revenue = 0.0;
  double c_bes = 0.0;
  double c_gt = 0.0;
  double c_p2g = 0.0;
  double shaping_delta = 0.0;
  double reward = 0.0;
  double soc_bes = 0.0;  // after the step
  double soc_p2g = 0.0;
  GtMode gt_mode = GtMode::Off;
  bool gt_started = false;
  bool done = false;

  double economic_reward() const { return revenue - c_bes - c_gt - c_p2g; }
};

struct DispatchSummary {
  double total_reward = 0.0;  // economic
  int gt_starts = 0;
  int gt_hours = 0;
  int p2g_hours = 0;
  int bes_charge = 0;
  int bes_discharge = 0;
};

struct DispatchLog {
  std::vector<StepRecord> steps;

  DispatchSummary summary() const;
  void write_csv(std::ostream& out) const;
};

/// Episodic dispatch environment. Holds a non-owning pointer to the instance,
/// which must outlive it.
class Env {
 public:
  struct State {
    std::size_t t = 0;
    PlantState plant;
    ShapingState shaping;
    bool done = true;
  };

  struct StepResult {
    Eigen::VectorXd observation;
    double reward = 0.0;
    bool done = false;
    StepRecord record;
  };

  Env(const EpisodeInstance& instance, PlantParams params = {}, EnvConfig config = {},
      ShapingConfig shaping = {});

  Eigen::VectorXd reset();
  StepResult step(const ActionIndices& action);
  StepResult step(std::size_t joint_action) { return step(split_index(joint_action, config_.actions)); }
  /// Like step() without assembling the next observation.
  StepRecord advance(const ActionIndices& action);

  Eigen::VectorXd observe() const;
  std::size_t observation_size() const;

  /// Shaping is applied only in training mode.
  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }

  const State& state() const { return state_; }
  void restore(const State& state) { state_ = state; }

  const EpisodeInstance& instance() const { return *instance_; }
  const PlantParams& params() const { return params_; }
  const EnvConfig& config() const { return config_; }
  const ShapingConfig& shaping() const { return shaping_; }
  std::size_t horizon() const { return instance_->size(); }
  std::size_t num_actions() const { return config_.actions.size(); }

 private:
  const EpisodeInstance* instance_;
  PlantParams params_;
  EnvConfig config_;
  ShapingConfig shaping_;
  bool training_ = true;
  State state_;
};

Eigen::VectorXd build_observation(const PlantState& plant, const EpisodeInstance& instance, std::size_t t,
                                  const EnvConfig& config);
std::size_t observation_size(const EnvConfig& config);

}  // namespace p2g
