#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "p2g/evaluate.hpp"
#include "p2g/nn.hpp"

namespace p2g {

/// Fixed-capacity ring of transitions with uniform sampling. Stored
/// transitions are never modified after insertion.
class ReplayBuffer {
 public:
  struct Batch {
    Eigen::MatrixXd obs;       // dim x n
    Eigen::MatrixXd next_obs;  // dim x n
    std::vector<std::size_t> actions;
    Eigen::VectorXd rewards;
    Eigen::VectorXd dones;  // 1 for terminal transitions
  };

  ReplayBuffer(std::size_t capacity, Eigen::Index obs_dim);

  void push(const Eigen::VectorXd& obs, std::size_t action, double reward, const Eigen::VectorXd& next_obs,
            bool done);
  Batch sample(std::size_t batch_size, std::mt19937_64& rng) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;
  Eigen::MatrixXd obs_;
  Eigen::MatrixXd next_obs_;
  std::vector<std::size_t> actions_;
  Eigen::VectorXd rewards_;
  Eigen::VectorXd dones_;
};

/// `r + gamma * max_a' Q_target(s', a')`, without bootstrap on terminal transitions.
/// `next_q` holds one column of action values per transition.
Eigen::VectorXd dqn_td_targets(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones,
                               const Eigen::MatrixXd& next_q, double gamma);

/// Double-Q variant: the action is chosen by `next_q_online` and scored by `next_q_target`.
Eigen::VectorXd double_dqn_td_targets(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones,
                                      const Eigen::MatrixXd& next_q_online, const Eigen::MatrixXd& next_q_target,
                                      double gamma);

struct DqnConfig {
  double gamma = 0.99;
  double learning_rate = 1e-3;
  std::vector<int> hidden{64, 64};
  std::size_t buffer_size = 50000;
  std::size_t batch_size = 64;
  long total_steps = 50000;
  long learning_starts = 1000;
  long train_freq = 1;
  long target_update = 500;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_fraction = 0.5;  // share of the budget over which epsilon anneals
  double reward_scale = 1000.0;
  double max_grad_norm = 10.0;
  long eval_interval = 1000;
  // > 0: an exploratory action is repeated for a duration drawn with P(n) ~ n^-zeta
  double exploration_zeta = 0.0;
  int exploration_max_duration = 24;
  bool double_q = true;  // online network picks the bootstrap action, target network scores it
  int n_step = 1;        // multi-step returns
  bool keep_best = true;  // return the best greedy network seen at evaluation points

  void validate() const;
};

double epsilon_at(long step, const DqnConfig& config);

/// Uniform action with probability epsilon, otherwise the first argmax.
std::size_t epsilon_greedy(const Eigen::VectorXd& q_values, double epsilon, std::mt19937_64& rng);

/// Duration of a repeated exploratory action, P(n) proportional to n^-mu on 1..max_duration.
int zeta_duration(double mu, int max_duration, std::mt19937_64& rng);

struct DqnResult {
  nn::Mlp<double> q_network;
  TrainingCurve curve;
};

DqnResult dqn_train(const EnvFactory& make_env, const DqnConfig& config, std::uint64_t seed);

Policy greedy_q_policy(const nn::Mlp<double>& q_network, const ActionSpec& spec);

}  // namespace p2g
