#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "p2g/evaluate.hpp"
#include "p2g/nn.hpp"

namespace p2g {

struct CemConfig {
  std::vector<int> hidden{16};
  int population = 50;
  double elite_fraction = 0.2;
  double initial_std = 0.5;
  double extra_noise = 0.1;         // added variance at the first iteration
  double extra_noise_decay = 0.95;  // per-iteration factor on the added variance
  int iterations = 100;
  bool elitism = true;  // previous elites compete with the new samples
  int eval_interval = 1;  // iterations between curve points

  void validate() const;
  int num_elites() const;
};

/// Weights of a joint-action scoring network; the policy picks the top score.
struct CemResult {
  nn::Mlp<double> policy;
  TrainingCurve curve;
  std::vector<double> elite_mean_returns;  // per iteration
};

/// One refit of the sampling distribution from the elite parameter vectors (columns).
void cem_refit(const Eigen::MatrixXd& elites, double extra_variance, Eigen::VectorXd& mean, Eigen::VectorXd& std);

CemResult cem_train(const EnvFactory& make_env, const CemConfig& config, std::uint64_t seed);

Policy argmax_policy(const nn::Mlp<double>& network, const ActionSpec& spec);

}  // namespace p2g
