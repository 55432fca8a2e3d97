#include "p2g/config.hpp"

#include <set>
#include <sstream>

#include "json.hpp"
#include "p2g/io.hpp"

namespace p2g {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError("'" + where() + "' must be an object");
  }

  template <typename T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    if (auto it = node_.find(key); it != node_.end()) read(*it, key, out);
  }

  template <typename T>
  void req(const char* key, T& out) {
    if (!node_.contains(key)) throw ConfigError("missing required key '" + join(key) + "'");
    opt(key, out);
  }

  bool has(const char* key) const { return node_.contains(key); }

  Section child(const char* key) {
    seen_.insert(key);
    return Section(node_.at(key), join(key));
  }

  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!seen_.contains(key)) throw ConfigError("unknown key '" + join(key) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void read(const json& value, const std::string& key, T& out) const {
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!value.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!value.is_number_integer()) throw ConfigError("");
        if constexpr (std::is_unsigned_v<T>)
          if (value.is_number_integer() && value.get<long long>() < 0) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!value.is_number()) throw ConfigError("");
      }
      out = value.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("key '" + join(key) + "' has the wrong type");
    }
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_plant(Section s, PlantParams& p) {
  s.opt("bes_capacity", p.bes_capacity);
  s.opt("bes_soc_min", p.bes_soc_min);
  s.opt("bes_soc_max", p.bes_soc_max);
  s.opt("bes_power_min", p.bes_power_min);
  s.opt("bes_power_max", p.bes_power_max);
  s.opt("eta_ch", p.eta_ch);
  s.opt("eta_dis", p.eta_dis);
  s.opt("peukert_kp", p.peukert_kp);
  s.opt("cycles_to_failure", p.cycles_to_failure);
  s.opt("bes_investment_per_mwh", p.bes_investment_per_mwh);
  s.opt("gt_power_max", p.gt_power_max);
  s.opt("gt_life_cycles", p.gt_life_cycles);
  s.opt("gt_life_hours", p.gt_life_hours);
  s.opt("gt_lifetime_om_cost", p.gt_lifetime_om_cost);
  s.opt("startup_minutes", p.startup_minutes);
  s.opt("startup_fuel_rate", p.startup_fuel_rate);
  s.opt("fuel_breakpoint", p.fuel_breakpoint);
  s.opt("fuel_low_slope", p.fuel_low_slope);
  s.opt("fuel_low_intercept", p.fuel_low_intercept);
  s.opt("fuel_high_slope", p.fuel_high_slope);
  s.opt("fuel_high_intercept", p.fuel_high_intercept);
  s.opt("p2g_capacity", p.p2g_capacity);
  s.opt("p2g_power_min", p.p2g_power_min);
  s.opt("p2g_power_max", p.p2g_power_max);
  s.opt("eta_p2g", p.eta_p2g);
  s.opt("alpha_p2g", p.alpha_p2g);
  s.opt("k_p2g_fix", p.k_p2g_fix);
  s.opt("k_p2g_var", p.k_p2g_var);
  s.opt("kg_per_lb", p.kg_per_lb);
  s.finish();
}

json write_plant(const PlantParams& p) {
  return {{"bes_capacity", p.bes_capacity},
          {"bes_soc_min", p.bes_soc_min},
          {"bes_soc_max", p.bes_soc_max},
          {"bes_power_min", p.bes_power_min},
          {"bes_power_max", p.bes_power_max},
          {"eta_ch", p.eta_ch},
          {"eta_dis", p.eta_dis},
          {"peukert_kp", p.peukert_kp},
          {"cycles_to_failure", p.cycles_to_failure},
          {"bes_investment_per_mwh", p.bes_investment_per_mwh},
          {"gt_power_max", p.gt_power_max},
          {"gt_life_cycles", p.gt_life_cycles},
          {"gt_life_hours", p.gt_life_hours},
          {"gt_lifetime_om_cost", p.gt_lifetime_om_cost},
          {"startup_minutes", p.startup_minutes},
          {"startup_fuel_rate", p.startup_fuel_rate},
          {"fuel_breakpoint", p.fuel_breakpoint},
          {"fuel_low_slope", p.fuel_low_slope},
          {"fuel_low_intercept", p.fuel_low_intercept},
          {"fuel_high_slope", p.fuel_high_slope},
          {"fuel_high_intercept", p.fuel_high_intercept},
          {"p2g_capacity", p.p2g_capacity},
          {"p2g_power_min", p.p2g_power_min},
          {"p2g_power_max", p.p2g_power_max},
          {"eta_p2g", p.eta_p2g},
          {"alpha_p2g", p.alpha_p2g},
          {"k_p2g_fix", p.k_p2g_fix},
          {"k_p2g_var", p.k_p2g_var},
          {"kg_per_lb", p.kg_per_lb}};
}

void read_env(Section s, EnvConfig& e) {
  if (s.has("actions")) {
    Section a = s.child("actions");
    a.opt("gt", e.actions.gt_levels);
    a.opt("p2g", e.actions.p2g_levels);
    a.opt("bes", e.actions.bes_levels);
    a.finish();
  }
  s.opt("wind_capacity", e.wind_capacity);
  s.opt("price_scale", e.price_scale);
  s.opt("p2g_soc_scale", e.p2g_soc_scale);
  std::vector<std::string> temporal;
  s.opt("temporal", temporal);
  if (!temporal.empty() || s.has("temporal")) {
    e.temporal.clear();
    for (const auto& name : temporal) {
      try {
        e.temporal.push_back(temporal_feature_from_string(name));
      } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("env.temporal: ") + err.what());
      }
    }
  }
  s.opt("forecast_horizons", e.forecast_horizons);
  s.finish();
}

json write_env(const EnvConfig& e) {
  json temporal = json::array();
  for (auto f : e.temporal) temporal.push_back(to_string(f));
  return {{"actions", {{"gt", e.actions.gt_levels}, {"p2g", e.actions.p2g_levels}, {"bes", e.actions.bes_levels}}},
          {"wind_capacity", e.wind_capacity},
          {"price_scale", e.price_scale},
          {"p2g_soc_scale", e.p2g_soc_scale},
          {"temporal", temporal},
          {"forecast_horizons", e.forecast_horizons}};
}

void read_shaping(Section s, ShapingConfig& c) {
  if (s.has("soc_penalty")) {
    Section k = s.child("soc_penalty");
    k.opt("enabled", c.soc_penalty.enabled);
    k.opt("weight", c.soc_penalty.weight);
    k.opt("soc_limit", c.soc_penalty.soc_limit);
    k.finish();
  }
  if (s.has("inactivity_penalty")) {
    Section k = s.child("inactivity_penalty");
    k.opt("enabled", c.inactivity.enabled);
    k.opt("weight", c.inactivity.weight);
    k.opt("threshold", c.inactivity.threshold);
    k.opt("rate", c.inactivity.rate);
    if (k.has("initial_mean")) {
      double mean = 0.0;
      k.opt("initial_mean", mean);
      c.inactivity.initial_mean = mean;
    }
    k.finish();
  }
  if (s.has("cost_attribution")) {
    Section k = s.child("cost_attribution");
    k.opt("enabled", c.cost_attribution.enabled);
    k.finish();
  }
  s.finish();
}

json write_shaping(const ShapingConfig& c) {
  json inactivity = {{"enabled", c.inactivity.enabled},
                     {"weight", c.inactivity.weight},
                     {"threshold", c.inactivity.threshold},
                     {"rate", c.inactivity.rate}};
  if (c.inactivity.initial_mean) inactivity["initial_mean"] = *c.inactivity.initial_mean;
  return {{"soc_penalty",
           {{"enabled", c.soc_penalty.enabled}, {"weight", c.soc_penalty.weight}, {"soc_limit", c.soc_penalty.soc_limit}}},
          {"inactivity_penalty", inactivity},
          {"cost_attribution", {{"enabled", c.cost_attribution.enabled}}}};
}

void read_dqn(Section s, DqnConfig& c) {
  s.opt("gamma", c.gamma);
  s.opt("learning_rate", c.learning_rate);
  s.opt("hidden", c.hidden);
  s.opt("buffer_size", c.buffer_size);
  s.opt("batch_size", c.batch_size);
  s.opt("total_steps", c.total_steps);
  s.opt("learning_starts", c.learning_starts);
  s.opt("train_freq", c.train_freq);
  s.opt("target_update", c.target_update);
  s.opt("epsilon_start", c.epsilon_start);
  s.opt("epsilon_end", c.epsilon_end);
  s.opt("epsilon_fraction", c.epsilon_fraction);
  s.opt("exploration_zeta", c.exploration_zeta);
  s.opt("exploration_max_duration", c.exploration_max_duration);
  s.opt("double_q", c.double_q);
  s.opt("n_step", c.n_step);
  s.opt("reward_scale", c.reward_scale);
  s.opt("max_grad_norm", c.max_grad_norm);
  s.opt("eval_interval", c.eval_interval);
  s.opt("keep_best", c.keep_best);
  s.finish();
}

json write_dqn(const DqnConfig& c) {
  return {{"gamma", c.gamma},
          {"learning_rate", c.learning_rate},
          {"hidden", c.hidden},
          {"buffer_size", c.buffer_size},
          {"batch_size", c.batch_size},
          {"total_steps", c.total_steps},
          {"learning_starts", c.learning_starts},
          {"train_freq", c.train_freq},
          {"target_update", c.target_update},
          {"epsilon_start", c.epsilon_start},
          {"epsilon_end", c.epsilon_end},
          {"epsilon_fraction", c.epsilon_fraction},
          {"exploration_zeta", c.exploration_zeta},
          {"exploration_max_duration", c.exploration_max_duration},
          {"double_q", c.double_q},
          {"n_step", c.n_step},
          {"reward_scale", c.reward_scale},
          {"max_grad_norm", c.max_grad_norm},
          {"eval_interval", c.eval_interval},
          {"keep_best", c.keep_best}};
}

void read_ppo(Section s, PpoConfig& c) {
  s.opt("gamma", c.gamma);
  s.opt("gae_lambda", c.gae_lambda);
  s.opt("clip_epsilon", c.clip_epsilon);
  s.opt("learning_rate", c.learning_rate);
  s.opt("hidden", c.hidden);
  s.opt("rollout_steps", c.rollout_steps);
  s.opt("epochs", c.epochs);
  s.opt("minibatch_size", c.minibatch_size);
  s.opt("entropy_coef", c.entropy_coef);
  s.opt("value_coef", c.value_coef);
  s.opt("max_grad_norm", c.max_grad_norm);
  s.opt("reward_scale", c.reward_scale);
  s.opt("normalize_advantages", c.normalize_advantages);
  s.opt("total_steps", c.total_steps);
  s.opt("eval_interval", c.eval_interval);
  s.opt("keep_best", c.keep_best);
  s.finish();
}

json write_ppo(const PpoConfig& c) {
  return {{"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"clip_epsilon", c.clip_epsilon},
          {"learning_rate", c.learning_rate},
          {"hidden", c.hidden},
          {"rollout_steps", c.rollout_steps},
          {"epochs", c.epochs},
          {"minibatch_size", c.minibatch_size},
          {"entropy_coef", c.entropy_coef},
          {"value_coef", c.value_coef},
          {"max_grad_norm", c.max_grad_norm},
          {"reward_scale", c.reward_scale},
          {"normalize_advantages", c.normalize_advantages},
          {"total_steps", c.total_steps},
          {"eval_interval", c.eval_interval},
          {"keep_best", c.keep_best}};
}

void read_cem(Section s, CemConfig& c) {
  s.opt("hidden", c.hidden);
  s.opt("population", c.population);
  s.opt("elite_fraction", c.elite_fraction);
  s.opt("initial_std", c.initial_std);
  s.opt("extra_noise", c.extra_noise);
  s.opt("extra_noise_decay", c.extra_noise_decay);
  s.opt("iterations", c.iterations);
  s.opt("elitism", c.elitism);
  s.opt("eval_interval", c.eval_interval);
  s.finish();
}

json write_cem(const CemConfig& c) {
  return {{"hidden", c.hidden},
          {"population", c.population},
          {"elite_fraction", c.elite_fraction},
          {"initial_std", c.initial_std},
          {"extra_noise", c.extra_noise},
          {"extra_noise_decay", c.extra_noise_decay},
          {"iterations", c.iterations},
          {"elitism", c.elitism},
          {"eval_interval", c.eval_interval}};
}

void read_oracle(Section s, OracleSettings& o) {
  std::string mode = o.grid.mode == DpGrid::Mode::Exact ? "exact" : "gridded";
  s.opt("mode", mode);
  if (mode == "exact") {
    o.grid.mode = DpGrid::Mode::Exact;
  } else if (mode == "gridded") {
    o.grid.mode = DpGrid::Mode::Gridded;
  } else {
    throw ConfigError("oracle.mode must be 'gridded' or 'exact'");
  }
  std::string lookup = o.grid.lookup == DpGrid::Lookup::Linear ? "linear" : "nearest";
  s.opt("lookup", lookup);
  if (lookup == "linear") {
    o.grid.lookup = DpGrid::Lookup::Linear;
  } else if (lookup == "nearest") {
    o.grid.lookup = DpGrid::Lookup::Nearest;
  } else {
    throw ConfigError("oracle.lookup must be 'nearest' or 'linear'");
  }
  s.opt("bes_points", o.grid.bes_points);
  s.opt("p2g_points", o.grid.p2g_points);
  s.opt("gt_hours_cap", o.grid.gt_hours_cap);
  s.opt("workers", o.grid.workers);
  std::size_t mib = o.grid.memory_budget_bytes >> 20;
  s.opt("memory_budget_mib", mib);
  o.grid.memory_budget_bytes = mib << 20;
  s.opt("max_horizon", o.max_horizon);
  s.finish();
}

json write_oracle(const OracleSettings& o) {
  return {{"mode", o.grid.mode == DpGrid::Mode::Exact ? "exact" : "gridded"},
          {"lookup", o.grid.lookup == DpGrid::Lookup::Linear ? "linear" : "nearest"},
          {"bes_points", o.grid.bes_points},
          {"p2g_points", o.grid.p2g_points},
          {"gt_hours_cap", o.grid.gt_hours_cap},
          {"workers", o.grid.workers},
          {"memory_budget_mib", o.grid.memory_budget_bytes >> 20},
          {"max_horizon", o.max_horizon}};
}

void read_data(Section s, DataSource& d, const std::filesystem::path& base_dir) {
  std::string source;
  s.req("source", source);
  if (source == "cs1") {
    d.kind = DataSource::Kind::Cs1;
  } else if (source == "cs2") {
    d.kind = DataSource::Kind::Cs2;
  } else if (source == "csv") {
    d.kind = DataSource::Kind::Csv;
  } else {
    throw ConfigError("data.source must be 'cs1', 'cs2' or 'csv'");
  }
  s.opt("seed", d.seed);
  std::string path;
  if (d.kind == DataSource::Kind::Csv) {
    s.req("path", path);
    d.csv_path = std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base_dir / path;
  } else {
    s.opt("path", path);
  }
  if (s.has("generator")) {
    Section g = s.child("generator");
    g.opt("median_price", d.generator.median_price);
    g.opt("diurnal_amplitude", d.generator.diurnal_amplitude);
    g.opt("price_noise", d.generator.price_noise);
    g.opt("spike_factor", d.generator.spike_factor);
    g.opt("spike_spread", d.generator.spike_spread);
    g.opt("wind_capacity", d.generator.wind_capacity);
    g.opt("wind_mean", d.generator.wind_mean);
    g.opt("wind_persistence", d.generator.wind_persistence);
    g.opt("wind_noise", d.generator.wind_noise);
    g.opt("start_epoch_seconds", d.generator.start_epoch_seconds);
    g.finish();
  }
  s.finish();
}

json write_data(const DataSource& d) {
  const char* source = d.kind == DataSource::Kind::Cs1 ? "cs1" : (d.kind == DataSource::Kind::Cs2 ? "cs2" : "csv");
  json j = {{"source", source}, {"seed", d.seed}};
  if (d.kind == DataSource::Kind::Csv) j["path"] = d.csv_path.string();
  const GeneratorConfig& g = d.generator;
  j["generator"] = {{"median_price", g.median_price},
                    {"diurnal_amplitude", g.diurnal_amplitude},
                    {"price_noise", g.price_noise},
                    {"spike_factor", g.spike_factor},
                    {"spike_spread", g.spike_spread},
                    {"wind_capacity", g.wind_capacity},
                    {"wind_mean", g.wind_mean},
                    {"wind_persistence", g.wind_persistence},
                    {"wind_noise", g.wind_noise},
                    {"start_epoch_seconds", g.start_epoch_seconds}};
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    plant.validate();
    env.validate(plant);
    shaping.validate();
    dqn.validate();
    ppo.validate();
    cem.validate();
    oracle.grid.validate(plant);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("seeds must be distinct");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section s(root, "");
  s.opt("name", c.name);
  if (!s.has("data")) throw ConfigError("missing required key 'data'");
  read_data(s.child("data"), c.data, base_dir);
  if (s.has("plant")) read_plant(s.child("plant"), c.plant);
  if (s.has("env")) read_env(s.child("env"), c.env);
  if (s.has("shaping")) read_shaping(s.child("shaping"), c.shaping);
  if (s.has("agents")) {
    Section a = s.child("agents");
    if (a.has("dqn")) read_dqn(a.child("dqn"), c.dqn);
    if (a.has("ppo")) read_ppo(a.child("ppo"), c.ppo);
    if (a.has("cem")) read_cem(a.child("cem"), c.cem);
    a.finish();
  }
  if (s.has("oracle")) read_oracle(s.child("oracle"), c.oracle);
  s.req("seeds", c.seeds);
  std::string out;
  s.req("output_dir", out);
  c.output_dir = out;
  s.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.parent_path());
}

std::string to_json_text(const ExperimentConfig& c) {
  const json j = {{"name", c.name},
                  {"data", write_data(c.data)},
                  {"plant", write_plant(c.plant)},
                  {"env", write_env(c.env)},
                  {"shaping", write_shaping(c.shaping)},
                  {"agents", {{"dqn", write_dqn(c.dqn)}, {"ppo", write_ppo(c.ppo)}, {"cem", write_cem(c.cem)}}},
                  {"oracle", write_oracle(c.oracle)},
                  {"seeds", c.seeds},
                  {"output_dir", c.output_dir.string()}};
  return j.dump(2) + "\n";
}

EpisodeInstance load_instance(const ExperimentConfig& c) {
  EpisodeInstance inst;
  switch (c.data.kind) {
    case DataSource::Kind::Cs1: inst = generate_cs1(c.data.seed, c.data.generator); break;
    case DataSource::Kind::Cs2: inst = generate_cs2(c.data.seed, c.data.generator); break;
    case DataSource::Kind::Csv: inst = load_csv(c.data.csv_path); break;
  }
  return inst;
}

std::string instance_hash(const EpisodeInstance& instance) {
  std::ostringstream out;
  write_csv(instance, out);
  return git_blob_hash(out.str());
}

}  // namespace p2g
