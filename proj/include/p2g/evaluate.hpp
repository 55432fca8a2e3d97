#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "p2g/env.hpp"

namespace p2g {

/// Maps an observation to per-device action indices.
using Policy = std::function<ActionIndices(const Eigen::VectorXd&)>;
/// Builds a fresh environment for training or evaluation.
using EnvFactory = std::function<Env()>;

/// One greedy evaluation episode in the layout of the results table.
struct EvalReport {
  long seed = 0;
  double episodic_reward = 0.0;  // C$, shaping off
  int gt_starts = 0;
  int gt_hours = 0;
  int p2g_hours = 0;
  int bes_charge = 0;
  int bes_discharge = 0;
};

struct Evaluation {
  EvalReport report;
  DispatchLog log;
};

/// Runs one episode with shaping disabled.
Evaluation evaluate(const Policy& policy, Env env, long seed = 0);

/// Economic return of one greedy episode (cheaper than evaluate()).
double episode_return(const Policy& policy, Env& env);

Policy constant_policy(ActionIndices action);

struct ReportStats {
  double mean = 0.0;
  double std = 0.0;  // population
};

ReportStats mean_std(const std::vector<double>& values);

void write_eval_csv(const std::vector<EvalReport>& reports, std::ostream& out);
std::vector<EvalReport> read_eval_csv(std::istream& in);

/// One logged point of a training run.
struct CurvePoint {
  long step = 0;
  double eval_return = 0.0;   // greedy, economic
  double train_return = 0.0;  // last finished training episode, economic
  double loss = 0.0;
  double exploration = 0.0;   // epsilon, policy entropy or CEM noise
};

struct TrainingCurve {
  std::vector<CurvePoint> points;
  void write_csv(std::ostream& out) const;
  static TrainingCurve read_csv(std::istream& in);
};

}  // namespace p2g
