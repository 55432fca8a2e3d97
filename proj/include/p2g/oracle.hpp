#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "p2g/env.hpp"

namespace p2g {

/// State discretization of the dispatch DP.
///
/// Gridded mode snaps successor SOCs to the nearest grid point. Exact mode
/// expands the reachable state lattice instead (identical states merge), which
/// is exact but only practical for short horizons.
struct DpGrid {
  enum class Mode { Gridded, Exact };
  /// How a next-state SOC pair reads the value table: nearest grid point,
  /// or bilinear interpolation between the surrounding points.
  enum class Lookup { Nearest, Linear };
  Mode mode = Mode::Gridded;
  Lookup lookup = Lookup::Linear;
  std::size_t bes_points = 101;
  std::size_t p2g_points = 201;
  int gt_hours_cap = 9;     // run-hour counter is capped here
  int workers = 1;          // threads for the per-step sweep
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
  bool gt_and_p2g_enabled = true;  // false: battery-only benchmark

  static DpGrid exact() {
    DpGrid g;
    g.mode = Mode::Exact;
    return g;
  }
  void validate(const PlantParams& params) const;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  double value = 0.0;           // optimum of the (gridded) DP
  double total_reward = 0.0;    // schedule re-simulated in the exact environment
  std::vector<std::size_t> schedule;  // joint action per step
  DispatchLog log;
  std::size_t states = 0;       // DP states evaluated
};

/// Backward induction over the discretized state space and the discrete action grid.
/// Ties go to the action with the smallest total requested |power|.
OracleResult dp_solve(const Env& env, const DpGrid& grid = {});

/// dp_solve restricted to battery actions.
OracleResult bes_only_solve(const Env& env, DpGrid grid = {});

/// Exhaustive search through the environment; lexicographically smallest
/// optimal schedule under the least-intervention action order.
OracleResult brute_force(const Env& env, std::size_t max_leaves = 10'000'000);

/// Maximum distance between a reachable SOC and its grid point, per storage.
struct SnapBound {
  double bes_soc = 0.0;
  double p2g_soc = 0.0;
  /// Conservative bound on the return lost to snapping: every step may
  /// misjudge the value of the snapped energy at the episode's highest price.
  double return_bound = 0.0;
};

SnapBound snap_bound(const Env& env, const DpGrid& grid);

/// Upper end of the gas-storage grid: the largest SOC reachable within the horizon.
double reachable_p2g_soc(const Env& env);

/// Economic return of selling all renewable power with no storage or turbine use.
double sell_only_return(const EpisodeInstance& instance);

/// Replays a fixed joint-action schedule with shaping off.
DispatchLog replay(const Env& env, const std::vector<std::size_t>& schedule);

}  // namespace p2g
