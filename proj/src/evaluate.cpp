#include "p2g/evaluate.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "p2g/io.hpp"

namespace p2g {

Evaluation evaluate(const Policy& policy, Env env, long seed) {
  env.set_training(false);
  Evaluation ev;
  Eigen::VectorXd obs = env.reset();
  while (true) {
    auto result = env.step(policy(obs));
    ev.log.steps.push_back(result.record);
    if (result.done) break;
    obs = std::move(result.observation);
  }
  const DispatchSummary s = ev.log.summary();
  ev.report = {seed, s.total_reward, s.gt_starts, s.gt_hours, s.p2g_hours, s.bes_charge, s.bes_discharge};
  return ev;
}

double episode_return(const Policy& policy, Env& env) {
  const bool training = env.training();
  env.set_training(false);
  Eigen::VectorXd obs = env.reset();
  double total = 0.0;
  while (true) {
    auto result = env.step(policy(obs));
    total += result.record.economic_reward();
    if (result.done) break;
    obs = std::move(result.observation);
  }
  env.set_training(training);
  return total;
}

Policy constant_policy(ActionIndices action) {
  return [action](const Eigen::VectorXd&) { return action; };
}

ReportStats mean_std(const std::vector<double>& values) {
  ReportStats s;
  if (values.empty()) return s;
  const auto n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

void write_eval_csv(const std::vector<EvalReport>& reports, std::ostream& out) {
  out << "seed,episodic_reward,gt_starts,gt_hours,p2g_hours,bes_charge,bes_discharge\n";
  for (const EvalReport& r : reports)
    out << r.seed << ',' << format_double(r.episodic_reward) << ',' << r.gt_starts << ',' << r.gt_hours << ','
        << r.p2g_hours << ',' << r.bes_charge << ',' << r.bes_discharge << '\n';
}

std::vector<EvalReport> read_eval_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("eval csv: missing header");
  std::vector<EvalReport> reports;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw std::runtime_error("eval csv: expected 7 fields in '" + line + "'");
    EvalReport r;
    r.seed = std::stol(f[0]);
    r.episodic_reward = parse_double(f[1]);
    r.gt_starts = std::stoi(f[2]);
    r.gt_hours = std::stoi(f[3]);
    r.p2g_hours = std::stoi(f[4]);
    r.bes_charge = std::stoi(f[5]);
    r.bes_discharge = std::stoi(f[6]);
    reports.push_back(r);
  }
  return reports;
}

void TrainingCurve::write_csv(std::ostream& out) const {
  out << "step,eval_return,train_return,loss,exploration\n";
  for (const CurvePoint& p : points)
    out << p.step << ',' << format_double(p.eval_return) << ',' << format_double(p.train_return) << ','
        << format_double(p.loss) << ',' << format_double(p.exploration) << '\n';
}

TrainingCurve TrainingCurve::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("curve csv: missing header");
  TrainingCurve curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw std::runtime_error("curve csv: expected 5 fields in '" + line + "'");
    curve.points.push_back({std::stol(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3]),
                            parse_double(f[4])});
  }
  return curve;
}

}  // namespace p2g
