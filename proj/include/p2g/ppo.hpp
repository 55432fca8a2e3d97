#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "p2g/evaluate.hpp"
#include "p2g/nn.hpp"

namespace p2g {

/// Mean over samples of `min(r * A, clip(r, 1 - eps, 1 + eps) * A)`.
double ppo_clip_objective(const Eigen::VectorXd& ratios, const Eigen::VectorXd& advantages, double clip_epsilon);

/// Generalized advantage estimates. `dones[t]` marks the last step of an
/// episode (no bootstrap past it); `last_value` bootstraps a rollout cut mid-episode.
Eigen::VectorXd gae_advantages(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                               const Eigen::VectorXd& dones, double last_value, double gamma, double lambda);

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  std::vector<int> hidden{64, 64};
  long rollout_steps = 1024;
  int epochs = 10;
  long minibatch_size = 64;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  double reward_scale = 1000.0;
  bool normalize_advantages = true;
  long total_steps = 200000;
  long eval_interval = 2048;
  bool keep_best = true;

  void validate() const;
};

/// Actor with one categorical head per device, logits concatenated as
/// [gt | p2g | bes], and a separate state-value critic.
struct PpoResult {
  nn::Mlp<double> actor;
  nn::Mlp<double> critic;
  TrainingCurve curve;
};

PpoResult ppo_train(const EnvFactory& make_env, const PpoConfig& config, std::uint64_t seed);

/// Most probable level per head.
Policy greedy_actor_policy(const nn::Mlp<double>& actor, const ActionSpec& spec);

}  // namespace p2g
