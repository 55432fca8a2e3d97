#include "p2g/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_map>

namespace p2g {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Problem {
  const EpisodeInstance* instance;
  PlantParams params;
  std::vector<std::size_t> actions;  // allowed joint indices, tie-break order
  std::vector<Setpoints> setpoints;  // by joint index
};

Problem make_problem(const Env& env, bool full_plant) {
  Problem pr{&env.instance(), env.params(), {}, {}};
  const ActionSpec& spec = env.config().actions;
  for (std::size_t j = 0; j < spec.size(); ++j) pr.setpoints.push_back(decode_action(j, spec));
  for (std::size_t j : least_intervention_order(spec)) {
    const Setpoints& s = pr.setpoints[j];
    if (full_plant || (s.gt == 0.0 && s.p2g == 0.0)) pr.actions.push_back(j);
  }
  return pr;
}

GtStatus gt_status_from_hours(int hours, const PlantParams& p) {
  if (hours <= 0) return {};
  return {hours * p.dt > p.gt_oper_threshold_hours() ? GtMode::RunningLong : GtMode::StartedRecently, hours};
}

struct Axis {
  double lo = 0.0;
  double step = 0.0;
  std::size_t n = 1;

  double at(std::size_t i) const { return lo + step * static_cast<double>(i); }
  std::size_t snap(double x) const {
    if (n == 1 || step <= 0) return 0;
    const double k = std::round((x - lo) / step);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n - 1)));
  }
  // Lower neighbour and weight of the upper one.
  std::pair<std::size_t, double> bracket(double x) const {
    if (n == 1 || step <= 0) return {0, 0.0};
    const double k = std::clamp((x - lo) / step, 0.0, static_cast<double>(n - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(k), n - 2);
    return {i, k - static_cast<double>(i)};
  }
};

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n));
  if (w == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t lo = k * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo < hi) threads.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : threads) t.join();
}

OracleResult finish(const Env& env, std::vector<std::size_t> schedule, double value, std::size_t states) {
  OracleResult r;
  r.value = value;
  r.schedule = std::move(schedule);
  r.log = replay(env, r.schedule);
  r.total_reward = r.log.summary().total_reward;
  r.states = states;
  return r;
}

OracleResult solve_gridded(const Env& env, const DpGrid& grid) {
  const Problem pr = make_problem(env, grid.gt_and_p2g_enabled);
  const PlantParams& p = pr.params;
  const EpisodeInstance& inst = *pr.instance;
  const std::size_t T = inst.size();

  const Axis bes{p.bes_soc_min, (p.bes_soc_max - p.bes_soc_min) / static_cast<double>(grid.bes_points - 1),
                 grid.bes_points};
  Axis gas;
  const double gas_hi = grid.gt_and_p2g_enabled ? reachable_p2g_soc(env) : 0.0;
  if (gas_hi > 0 && grid.p2g_points > 1) gas = {0.0, gas_hi / static_cast<double>(grid.p2g_points - 1), grid.p2g_points};
  const std::size_t G = grid.gt_and_p2g_enabled ? static_cast<std::size_t>(grid.gt_hours_cap) + 1 : 1;
  const std::size_t layer = G * bes.n * gas.n;

  const double bytes = static_cast<double>(T + 1) * static_cast<double>(layer) * sizeof(double);
  if (bytes > static_cast<double>(grid.memory_budget_bytes))
    throw OracleError("dp_solve: value table needs " + std::to_string(static_cast<long long>(bytes / (1 << 20))) +
                      " MiB, above the memory budget");

  auto key = [&](const PlantState& s) {
    const std::size_t g = static_cast<std::size_t>(std::min(s.gt.run_hours, grid.gt_hours_cap));
    return (g * bes.n + bes.snap(s.soc_bes)) * gas.n + gas.snap(s.soc_p2g);
  };
  auto lookup = [&](const std::vector<double>& v, const PlantState& s) {
    if (grid.lookup == DpGrid::Lookup::Nearest) return v[key(s)];
    const std::size_t g = static_cast<std::size_t>(std::min(s.gt.run_hours, grid.gt_hours_cap));
    const auto [i, wi] = bes.bracket(s.soc_bes);
    const auto [j, wj] = gas.bracket(s.soc_p2g);
    const std::size_t base = (g * bes.n + i) * gas.n + j;
    const std::size_t dj = gas.n > 1 ? 1 : 0;
    const double lo = (1 - wj) * v[base] + wj * v[base + dj];
    const double hi = (1 - wj) * v[base + gas.n] + wj * v[base + gas.n + dj];
    return (1 - wi) * lo + wi * hi;
  };

  std::vector<std::vector<double>> value(T + 1);
  value[T].assign(layer, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    value[t].assign(layer, 0.0);
    const double p_re = inst.renewable_power[t];
    const double price = inst.prices[t];
    const std::vector<double>& next = value[t + 1];
    std::vector<double>& cur = value[t];
    parallel_for(layer, grid.workers, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t idx = lo; idx < hi; ++idx) {
        const std::size_t j = idx % gas.n;
        const std::size_t i = (idx / gas.n) % bes.n;
        const std::size_t g = idx / (gas.n * bes.n);
        const PlantState s{bes.at(i), gas.at(j), gt_status_from_hours(static_cast<int>(g), p)};
        double best = kNegInf;
        for (std::size_t a : pr.actions) {
          const Transition tr = simulate_step(s, pr.setpoints[a], p_re, price, p);
          const double q = tr.reward() + lookup(next, tr.next);
          if (q > best) best = q;
        }
        cur[idx] = best;
      }
    });
  }

  // Greedy forward pass from the exact initial state.
  std::vector<std::size_t> schedule;
  PlantState s = initial_plant_state(p);
  for (std::size_t t = 0; t < T; ++t) {
    double best = kNegInf;
    std::size_t arg = pr.actions.front();
    PlantState best_next{};
    for (std::size_t a : pr.actions) {
      const Transition tr = simulate_step(s, pr.setpoints[a], inst.renewable_power[t], inst.prices[t], p);
      const double q = tr.reward() + lookup(value[t + 1], tr.next);
      if (q > best) {
        best = q;
        arg = a;
        best_next = tr.next;
      }
    }
    schedule.push_back(arg);
    s = best_next;
  }
  return finish(env, std::move(schedule), lookup(value[0], initial_plant_state(p)), layer * T);
}

struct StateKey {
  std::uint64_t bes;
  std::uint64_t gas;
  int hours;
  bool operator==(const StateKey&) const = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const {
    std::uint64_t h = k.bes * 0x9E3779B97F4A7C15ULL;
    h ^= k.gas + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.hours) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

OracleResult solve_exact(const Env& env, const DpGrid& grid) {
  const Problem pr = make_problem(env, grid.gt_and_p2g_enabled);
  const PlantParams& p = pr.params;
  const EpisodeInstance& inst = *pr.instance;
  const std::size_t T = inst.size();
  const std::size_t A = pr.actions.size();

  struct Edge {
    std::uint32_t next;
    double reward;
  };
  std::vector<std::vector<PlantState>> layers(T + 1);
  std::vector<std::vector<Edge>> edges(T);
  layers[0].push_back(initial_plant_state(p));
  std::size_t bytes = 0;
  std::size_t states = 0;
  for (std::size_t t = 0; t < T; ++t) {
    std::unordered_map<StateKey, std::uint32_t, StateKeyHash> index;
    edges[t].reserve(layers[t].size() * A);
    for (const PlantState& s : layers[t]) {
      for (std::size_t a : pr.actions) {
        const Transition tr = simulate_step(s, pr.setpoints[a], inst.renewable_power[t], inst.prices[t], p);
        const StateKey k{std::bit_cast<std::uint64_t>(tr.next.soc_bes), std::bit_cast<std::uint64_t>(tr.next.soc_p2g),
                         tr.next.gt.run_hours};
        auto [it, inserted] = index.try_emplace(k, static_cast<std::uint32_t>(layers[t + 1].size()));
        if (inserted) layers[t + 1].push_back(tr.next);
        edges[t].push_back({it->second, tr.reward()});
      }
    }
    states += layers[t].size();
    bytes += edges[t].size() * sizeof(Edge) + layers[t + 1].size() * sizeof(PlantState);
    if (bytes > grid.memory_budget_bytes)
      throw OracleError("dp_solve: exact state lattice exceeds the memory budget at step " + std::to_string(t));
  }

  std::vector<double> next_value(layers[T].size(), 0.0);
  std::vector<std::vector<std::uint32_t>> policy(T);
  for (std::size_t t = T; t-- > 0;) {
    std::vector<double> cur(layers[t].size(), kNegInf);
    policy[t].assign(layers[t].size(), 0);
    for (std::size_t s = 0; s < layers[t].size(); ++s) {
      for (std::size_t k = 0; k < A; ++k) {
        const Edge& e = edges[t][s * A + k];
        const double q = e.reward + next_value[e.next];
        if (q > cur[s]) {
          cur[s] = q;
          policy[t][s] = static_cast<std::uint32_t>(k);
        }
      }
    }
    next_value = std::move(cur);
  }

  std::vector<std::size_t> schedule;
  std::size_t s = 0;
  for (std::size_t t = 0; t < T; ++t) {
    const std::uint32_t k = policy[t][s];
    schedule.push_back(pr.actions[k]);
    s = edges[t][s * A + k].next;
  }
  return finish(env, std::move(schedule), next_value[0], states);
}

}  // namespace

void DpGrid::validate(const PlantParams& params) const {
  if (mode == Mode::Exact) return;
  if (bes_points < 2) throw OracleError("DpGrid: bes_points must be >= 2");
  if (p2g_points < 1) throw OracleError("DpGrid: p2g_points must be >= 1");
  if (gt_hours_cap * params.dt <= params.gt_oper_threshold_hours())
    throw OracleError("DpGrid: gt_hours_cap must exceed the operating-cost threshold");
  if (workers < 1) throw OracleError("DpGrid: workers must be >= 1");
}

double reachable_p2g_soc(const Env& env) {
  const PlantParams& p = env.params();
  double fuel = 0.0;
  for (double w : env.instance().renewable_power)
    if (w >= -p.p2g_power_min) fuel += std::min(w, -p.p2g_power_max) * p.p2g_fuel_per_mw();
  return std::min(1.0, fuel / p.p2g_capacity);
}

OracleResult dp_solve(const Env& env, const DpGrid& grid) {
  grid.validate(env.params());
  return grid.mode == DpGrid::Mode::Exact ? solve_exact(env, grid) : solve_gridded(env, grid);
}

OracleResult bes_only_solve(const Env& env, DpGrid grid) {
  grid.gt_and_p2g_enabled = false;
  return dp_solve(env, grid);
}

OracleResult brute_force(const Env& env, std::size_t max_leaves) {
  const ActionSpec& spec = env.config().actions;
  const std::vector<std::size_t> order = least_intervention_order(spec);
  const std::size_t T = env.horizon();
  double leaves = 1.0;
  for (std::size_t t = 0; t < T; ++t) leaves *= static_cast<double>(order.size());
  if (leaves > static_cast<double>(max_leaves))
    throw OracleError("brute_force: " + std::to_string(order.size()) + "^" + std::to_string(T) +
                      " schedules exceed the enumeration limit");

  Env sim = env;
  sim.set_training(false);
  sim.reset();
  std::vector<ActionIndices> decoded;
  for (std::size_t j = 0; j < spec.size(); ++j) decoded.push_back(split_index(j, spec));

  // best_suffix[d] holds the best actions for steps d..T-1 found by the latest search at depth d.
  std::vector<std::vector<std::size_t>> best_suffix(T + 1);
  auto search = [&](auto&& self, std::size_t depth) -> double {
    if (depth == T) return 0.0;
    const Env::State saved = sim.state();
    double best = kNegInf;
    std::vector<std::size_t> best_seq;
    for (std::size_t a : order) {
      const StepRecord rec = sim.advance(decoded[a]);
      const double q = rec.economic_reward() + self(self, depth + 1);
      sim.restore(saved);
      if (q > best) {
        best = q;
        best_seq.assign(1, a);
        best_seq.insert(best_seq.end(), best_suffix[depth + 1].begin(), best_suffix[depth + 1].end());
      }
    }
    best_suffix[depth] = std::move(best_seq);
    return best;
  };
  const double value = search(search, 0);
  return finish(env, best_suffix[0], value, static_cast<std::size_t>(leaves));
}

SnapBound snap_bound(const Env& env, const DpGrid& grid) {
  const PlantParams& p = env.params();
  SnapBound b;
  if (grid.mode == DpGrid::Mode::Exact) return b;
  b.bes_soc = 0.5 * (p.bes_soc_max - p.bes_soc_min) / static_cast<double>(grid.bes_points - 1);
  if (grid.gt_and_p2g_enabled && grid.p2g_points > 1)
    b.p2g_soc = 0.5 * reachable_p2g_soc(env) / static_cast<double>(grid.p2g_points - 1);
  const double mwh_per_lb =
      std::max(p.gt_power_max / gt_fuel_rate(p.gt_power_max, p), p.fuel_breakpoint / gt_fuel_rate(p.fuel_breakpoint, p));
  const double top_price = std::max(0.0, *std::max_element(env.instance().prices.begin(), env.instance().prices.end()));
  const double per_step = top_price * (b.bes_soc * p.bes_capacity * p.eta_dis + b.p2g_soc * p.p2g_capacity * mwh_per_lb);
  b.return_bound = per_step * static_cast<double>(env.horizon());
  return b;
}

double sell_only_return(const EpisodeInstance& instance) {
  double total = 0.0;
  for (std::size_t t = 0; t < instance.size(); ++t)
    total += instance.renewable_power[t] * instance.prices[t] * instance.dt;
  return total;
}

DispatchLog replay(const Env& env, const std::vector<std::size_t>& schedule) {
  Env sim = env;
  sim.set_training(false);
  sim.reset();
  if (schedule.size() != sim.horizon()) throw std::invalid_argument("replay: schedule length differs from the horizon");
  DispatchLog log;
  for (std::size_t a : schedule) log.steps.push_back(sim.advance(split_index(a, sim.config().actions)));
  return log;
}

}  // namespace p2g
