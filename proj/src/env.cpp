#include "p2g/env.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "p2g/io.hpp"

namespace p2g {

namespace {

void require_levels(const std::vector<double>& levels, const char* name) {
  if (levels.size() < 2) throw std::invalid_argument(std::string("ActionSpec: ") + name + " needs >= 2 levels");
  if (!std::is_sorted(levels.begin(), levels.end()) ||
      std::adjacent_find(levels.begin(), levels.end()) != levels.end())
    throw std::invalid_argument(std::string("ActionSpec: ") + name + " must be strictly increasing");
  if (std::find(levels.begin(), levels.end(), 0.0) == levels.end())
    throw std::invalid_argument(std::string("ActionSpec: ") + name + " must contain 0");
}

}  // namespace

void ActionSpec::validate(const PlantParams& p) const {
  require_levels(gt_levels, "gt_levels");
  require_levels(p2g_levels, "p2g_levels");
  require_levels(bes_levels, "bes_levels");
  for (double v : gt_levels)
    if (v < 0 || v > p.gt_power_max) throw std::invalid_argument("ActionSpec: gt level outside [0, gt_power_max]");
  for (double v : p2g_levels)
    if (v != 0.0 && (v < p.p2g_power_max || v > p.p2g_power_min))
      throw std::invalid_argument("ActionSpec: p2g level must be 0 or within [p2g_power_max, p2g_power_min]");
  for (double v : bes_levels)
    if (v < p.bes_power_min || v > p.bes_power_max)
      throw std::invalid_argument("ActionSpec: bes level outside [bes_power_min, bes_power_max]");
}

std::size_t joint_index(const ActionIndices& a, const ActionSpec& spec) {
  if (a.gt >= spec.gt_levels.size() || a.p2g >= spec.p2g_levels.size() || a.bes >= spec.bes_levels.size())
    throw std::out_of_range("joint_index: head index out of range");
  return (a.gt * spec.p2g_levels.size() + a.p2g) * spec.bes_levels.size() + a.bes;
}

ActionIndices split_index(std::size_t joint, const ActionSpec& spec) {
  if (joint >= spec.size()) throw std::out_of_range("split_index: action index out of range");
  const std::size_t nb = spec.bes_levels.size();
  const std::size_t np = spec.p2g_levels.size();
  return {joint / (nb * np), (joint / nb) % np, joint % nb};
}

Setpoints decode_action(const ActionIndices& a, const ActionSpec& spec) {
  if (a.gt >= spec.gt_levels.size() || a.p2g >= spec.p2g_levels.size() || a.bes >= spec.bes_levels.size())
    throw std::out_of_range("decode_action: head index out of range");
  return {spec.gt_levels[a.gt], spec.p2g_levels[a.p2g], spec.bes_levels[a.bes]};
}

Setpoints decode_action(std::size_t joint, const ActionSpec& spec) {
  return decode_action(split_index(joint, spec), spec);
}

std::vector<std::size_t> least_intervention_order(const ActionSpec& spec) {
  std::vector<std::size_t> order(spec.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto magnitude = [&](std::size_t j) {
    const Setpoints s = decode_action(j, spec);
    return std::abs(s.gt) + std::abs(s.p2g) + std::abs(s.bes);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return magnitude(a) < magnitude(b); });
  return order;
}

PlantState initial_plant_state(const PlantParams& params) {
  return PlantState{params.bes_soc_min, 0.0, GtStatus{}};
}

Setpoints project_action(const Setpoints& requested, const PlantState& state, double p_re,
                         const PlantParams& p) {
  Setpoints out;

  if (requested.p2g < 0) {
    const double headroom = std::max(0.0, 1.0 - state.soc_p2g) * p.p2g_capacity / p.p2g_fuel_per_mw();
    const double upper = std::min({-p.p2g_power_max, p_re, headroom});
    if (upper >= -p.p2g_power_min) out.p2g = -std::min(-requested.p2g, upper);
  }

  if (requested.bes < 0) {
    const double headroom = std::max(0.0, p.bes_soc_max - state.soc_bes) * p.bes_capacity / (p.eta_ch * p.dt);
    const double magnitude = std::min({-requested.bes, -p.bes_power_min, p_re + out.p2g, headroom});
    if (magnitude > 0) out.bes = -magnitude;
  } else if (requested.bes > 0) {
    const double reserve = std::max(0.0, state.soc_bes - p.bes_soc_min) * p.bes_capacity / p.dt;
    const double magnitude = std::min({requested.bes, p.bes_power_max, reserve});
    if (magnitude > 0) out.bes = magnitude;
  }

  if (requested.gt > 0) {
    const GtLimit limit = gt_max_power(!state.gt.on(), state.soc_p2g * p.p2g_capacity, p);
    const double power = std::min({requested.gt, p.gt_power_max, limit.power});
    if (power > 0) out.gt = power;
  }
  return out;
}

Transition simulate_step(const PlantState& state, const Setpoints& requested, double p_re, double price,
                         const PlantParams& p) {
  Transition tr;
  tr.projected = project_action(requested, state, p_re, p);

  const StepOutcome p2g = p2g_step(state.soc_p2g, tr.projected.p2g, p);
  const StepOutcome bes = bes_step(state.soc_bes, tr.projected.bes, p);
  const double available = state.soc_p2g * p.p2g_capacity;
  const StepOutcome gt = gt_step(state.gt, tr.projected.gt, available, p);

  const bool exhausted = gt.fuel > 0 && gt.fuel == available;
  double soc_p2g = exhausted ? p2g.fuel / p.p2g_capacity : p2g.soc - gt.fuel / p.p2g_capacity;
  tr.next.soc_p2g = std::clamp(soc_p2g, 0.0, 1.0);
  tr.next.soc_bes = bes.soc;
  tr.next.gt = gt.status;

  tr.p_bes = bes.power;
  tr.p_gt = gt.power;
  tr.p_p2g = p2g.power;
  tr.p_grid = p_re + tr.p_bes + tr.p_gt + tr.p_p2g;
  tr.revenue = tr.p_grid * price * p.dt;
  tr.c_bes = bes.cost;
  tr.c_gt = gt.cost;
  tr.c_p2g = p2g.cost;
  tr.fuel_generated = p2g.fuel;
  tr.fuel_burnt = gt.fuel;
  tr.gt_started = !state.gt.on() && gt.status.on();
  return tr;
}

std::string to_string(TemporalFeature feature) {
  switch (feature) {
    case TemporalFeature::HourOfDay: return "hour_of_day";
    case TemporalFeature::WeekOfYear: return "week_of_year";
    case TemporalFeature::MonthOfYear: return "month_of_year";
  }
  return "unknown";
}

TemporalFeature temporal_feature_from_string(const std::string& name) {
  if (name == "hour_of_day") return TemporalFeature::HourOfDay;
  if (name == "week_of_year") return TemporalFeature::WeekOfYear;
  if (name == "month_of_year") return TemporalFeature::MonthOfYear;
  throw std::invalid_argument("unknown temporal feature '" + name + "'");
}

std::pair<double, double> temporal_counter(TemporalFeature feature, std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{epoch_seconds}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  switch (feature) {
    case TemporalFeature::HourOfDay:
      return {24.0, static_cast<double>(floor<hours>(tp - day).count())};
    case TemporalFeature::WeekOfYear: {
      const auto day_of_year = (day - sys_days{ymd.year() / January / 1}).count();
      return {52.0, static_cast<double>(day_of_year / 7)};
    }
    case TemporalFeature::MonthOfYear:
      return {12.0, static_cast<double>(static_cast<unsigned>(ymd.month()) - 1)};
  }
  return {1.0, 0.0};
}

void EnvConfig::validate(const PlantParams& params) const {
  actions.validate(params);
  if (!(wind_capacity > 0) || !(price_scale > 0) || !(p2g_soc_scale > 0))
    throw std::invalid_argument("EnvConfig: scaling constants must be positive");
  for (int h : forecast_horizons)
    if (h < 1) throw std::invalid_argument("EnvConfig: forecast horizons must be >= 1");
}

std::size_t observation_size(const EnvConfig& config) {
  return 7 + 2 * config.temporal.size() + config.forecast_horizons.size();
}

Eigen::VectorXd build_observation(const PlantState& plant, const EpisodeInstance& instance, std::size_t t,
                                  const EnvConfig& config) {
  const std::size_t last = instance.size() - 1;
  t = std::min(t, last);
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(observation_size(config)));
  Eigen::Index k = 0;
  obs[k++] = instance.renewable_power[t] / config.wind_capacity;
  obs[k++] = instance.prices[t] / config.price_scale;
  obs[k++] = plant.soc_bes;
  obs[k++] = plant.soc_p2g / config.p2g_soc_scale;
  obs[k + static_cast<int>(plant.gt.mode)] = 1.0;
  k += 3;
  for (TemporalFeature f : config.temporal) {
    const auto [period, counter] = temporal_counter(f, instance.timestamp(t));
    const double angle = 2.0 * std::numbers::pi * counter / period;
    obs[k++] = std::sin(angle);
    obs[k++] = std::cos(angle);
  }
  for (int h : config.forecast_horizons)
    obs[k++] = instance.prices[std::min(t + static_cast<std::size_t>(h), last)] / config.price_scale;
  return obs;
}

DispatchSummary DispatchLog::summary() const {
  DispatchSummary s;
  for (const StepRecord& r : steps) {
    s.total_reward += r.economic_reward();
    s.gt_starts += r.gt_started ? 1 : 0;
    s.gt_hours += r.p_gt > 0 ? 1 : 0;
    s.p2g_hours += r.p_p2g < 0 ? 1 : 0;
    s.bes_charge += r.p_bes < 0 ? 1 : 0;
    s.bes_discharge += r.p_bes > 0 ? 1 : 0;
  }
  return s;
}

void DispatchLog::write_csv(std::ostream& out) const {
  out << "t,action,p_re,price,p_gt,p_p2g,p_bes,p_grid,revenue,c_bes,c_gt,c_p2g,shaping_delta,reward,"
         "soc_bes,soc_p2g,gt_mode,gt_started\n";
  for (const StepRecord& r : steps) {
    out << r.t << ',' << r.action << ',' << format_double(r.p_re) << ',' << format_double(r.price) << ','
        << format_double(r.p_gt) << ',' << format_double(r.p_p2g) << ',' << format_double(r.p_bes) << ','
        << format_double(r.p_grid) << ',' << format_double(r.revenue) << ',' << format_double(r.c_bes) << ','
        << format_double(r.c_gt) << ',' << format_double(r.c_p2g) << ',' << format_double(r.shaping_delta)
        << ',' << format_double(r.reward) << ',' << format_double(r.soc_bes) << ','
        << format_double(r.soc_p2g) << ',' << static_cast<int>(r.gt_mode) << ',' << (r.gt_started ? 1 : 0)
        << '\n';
  }
}

Env::Env(const EpisodeInstance& instance, PlantParams params, EnvConfig config, ShapingConfig shaping)
    : instance_(&instance), params_(params), config_(std::move(config)), shaping_(shaping) {
  instance.validate();
  params_.validate();
  params_.dt = instance.dt;
  config_.validate(params_);
  shaping_.validate();
}

Eigen::VectorXd Env::reset() {
  state_ = State{};
  state_.plant = initial_plant_state(params_);
  state_.shaping.running_mean_price =
      shaping_.inactivity.initial_mean.value_or(initial_mean_price(instance_->prices));
  state_.done = false;
  return observe();
}

Eigen::VectorXd Env::observe() const { return build_observation(state_.plant, *instance_, state_.t, config_); }

std::size_t Env::observation_size() const { return p2g::observation_size(config_); }

StepRecord Env::advance(const ActionIndices& action) {
  if (state_.done) throw std::logic_error("Env::step called on a finished episode; call reset()");
  const std::size_t t = state_.t;
  const double p_re = instance_->renewable_power[t];
  const double price = instance_->prices[t];
  const PlantState before = state_.plant;
  const Transition tr = simulate_step(before, decode_action(action, config_.actions), p_re, price, params_);

  StepRecord rec;
  rec.t = t;
  rec.action = joint_index(action, config_.actions);
  rec.p_re = p_re;
  rec.price = price;
  rec.projected = tr.projected;
  rec.p_bes = tr.p_bes;
  rec.p_gt = tr.p_gt;
  rec.p_p2g = tr.p_p2g;
  rec.p_grid = tr.p_grid;
  rec.revenue = tr.revenue;
  rec.c_bes = tr.c_bes;
  rec.c_gt = tr.c_gt;
  rec.c_p2g = tr.c_p2g;
  rec.soc_bes = tr.next.soc_bes;
  rec.soc_p2g = tr.next.soc_p2g;
  rec.gt_mode = tr.next.gt.mode;
  rec.gt_started = tr.gt_started;

  double delta = 0.0;
  if (training_ && shaping_.any()) {
    ShapingState& s = state_.shaping;
    if (shaping_.inactivity.enabled)
      delta -= inactivity_penalty_step(price, tr.p_p2g, p_re, -params_.p2g_power_min, s.running_mean_price,
                                       shaping_.inactivity);
    if (shaping_.cost_attribution.enabled) {
      if (tr.p_p2g < 0) delta += attribution_on_charge(tr.c_p2g, tr.p_p2g, price, params_.dt, s.ledger).reward_delta;
      if (tr.fuel_burnt > 0) {
        const bool exhausted = tr.fuel_burnt == before.soc_p2g * params_.p2g_capacity;
        const double after_draw = exhausted ? 0.0 : before.soc_p2g - tr.fuel_burnt / params_.p2g_capacity;
        delta += attribution_on_discharge(before.soc_p2g, after_draw, s.ledger).reward_delta;
      }
    }
    if (shaping_.soc_penalty.enabled) delta -= soc_penalty(tr.next.soc_p2g, shaping_.soc_penalty);
  }
  rec.shaping_delta = delta;
  rec.reward = tr.reward() + delta;

  state_.plant = tr.next;
  state_.t = t + 1;
  state_.done = state_.t >= instance_->size();
  rec.done = state_.done;
  return rec;
}

Env::StepResult Env::step(const ActionIndices& action) {
  StepResult result;
  result.record = advance(action);
  result.reward = result.record.reward;
  result.done = result.record.done;
  result.observation = observe();
  return result;
}

}  // namespace p2g
