#include "p2g/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace p2g {

ReplayBuffer::ReplayBuffer(std::size_t capacity, Eigen::Index obs_dim)
    : capacity_(capacity),
      obs_(obs_dim, static_cast<Eigen::Index>(capacity)),
      next_obs_(obs_dim, static_cast<Eigen::Index>(capacity)),
      actions_(capacity),
      rewards_(static_cast<Eigen::Index>(capacity)),
      dones_(static_cast<Eigen::Index>(capacity)) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(const Eigen::VectorXd& obs, std::size_t action, double reward,
                        const Eigen::VectorXd& next_obs, bool done) {
  const auto i = static_cast<Eigen::Index>(next_);
  obs_.col(i) = obs;
  next_obs_.col(i) = next_obs;
  actions_[next_] = action;
  rewards_[i] = reward;
  dones_[i] = done ? 1.0 : 0.0;
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
  if (size_ < batch_size || batch_size == 0)
    throw std::logic_error("ReplayBuffer::sample: not enough transitions");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  Batch b;
  const auto n = static_cast<Eigen::Index>(batch_size);
  b.obs.resize(obs_.rows(), n);
  b.next_obs.resize(obs_.rows(), n);
  b.actions.resize(batch_size);
  b.rewards.resize(n);
  b.dones.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::size_t i = pick(rng);
    const auto col = static_cast<Eigen::Index>(i);
    b.obs.col(k) = obs_.col(col);
    b.next_obs.col(k) = next_obs_.col(col);
    b.actions[static_cast<std::size_t>(k)] = actions_[i];
    b.rewards[k] = rewards_[col];
    b.dones[k] = dones_[col];
  }
  return b;
}

Eigen::VectorXd dqn_td_targets(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones,
                               const Eigen::MatrixXd& next_q, double gamma) {
  if (rewards.size() == 0) throw std::invalid_argument("dqn_td_targets: empty batch");
  if (dones.size() != rewards.size() || next_q.cols() != rewards.size())
    throw std::invalid_argument("dqn_td_targets: batch size mismatch");
  const Eigen::VectorXd best = next_q.colwise().maxCoeff().transpose();
  return rewards.array() + gamma * (1.0 - dones.array()) * best.array();
}

Eigen::VectorXd double_dqn_td_targets(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones,
                                      const Eigen::MatrixXd& next_q_online, const Eigen::MatrixXd& next_q_target,
                                      double gamma) {
  if (rewards.size() == 0) throw std::invalid_argument("double_dqn_td_targets: empty batch");
  if (dones.size() != rewards.size() || next_q_online.cols() != rewards.size() ||
      next_q_target.cols() != rewards.size() || next_q_online.rows() != next_q_target.rows())
    throw std::invalid_argument("double_dqn_td_targets: batch size mismatch");
  Eigen::VectorXd out(rewards.size());
  for (Eigen::Index k = 0; k < rewards.size(); ++k) {
    Eigen::Index a = 0;
    next_q_online.col(k).maxCoeff(&a);
    out[k] = rewards[k] + gamma * (1.0 - dones[k]) * next_q_target(a, k);
  }
  return out;
}

void DqnConfig::validate() const {
  if (gamma < 0 || gamma > 1) throw std::invalid_argument("dqn: gamma must lie in [0,1]");
  if (!(learning_rate > 0)) throw std::invalid_argument("dqn: learning_rate must be positive");
  if (batch_size == 0 || buffer_size < batch_size) throw std::invalid_argument("dqn: need 0 < batch_size <= buffer_size");
  if (total_steps <= 0 || train_freq <= 0 || target_update <= 0 || eval_interval <= 0)
    throw std::invalid_argument("dqn: step counts must be positive");
  if (epsilon_start < 0 || epsilon_start > 1 || epsilon_end < 0 || epsilon_end > 1)
    throw std::invalid_argument("dqn: epsilon must lie in [0,1]");
  if (!(reward_scale > 0)) throw std::invalid_argument("dqn: reward_scale must be positive");
  if (n_step < 1) throw std::invalid_argument("dqn: n_step must be >= 1");
  if (exploration_zeta < 0 || (exploration_zeta > 0 && exploration_max_duration < 1))
    throw std::invalid_argument("dqn: exploration_zeta must be >= 0 with exploration_max_duration >= 1");
}

double epsilon_at(long step, const DqnConfig& c) {
  const double anneal = c.epsilon_fraction * static_cast<double>(c.total_steps);
  if (anneal <= 0) return c.epsilon_end;
  const double frac = std::min(1.0, static_cast<double>(step) / anneal);
  return c.epsilon_start + frac * (c.epsilon_end - c.epsilon_start);
}

std::size_t epsilon_greedy(const Eigen::VectorXd& q_values, double epsilon, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(q_values.size()) - 1);
    return pick(rng);
  }
  return static_cast<std::size_t>(nn::argmax(q_values));
}

int zeta_duration(double mu, int max_duration, std::mt19937_64& rng) {
  if (max_duration < 1) throw std::invalid_argument("zeta_duration: max_duration must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(max_duration));
  for (int n = 1; n <= max_duration; ++n) w[static_cast<std::size_t>(n - 1)] = std::pow(static_cast<double>(n), -mu);
  std::discrete_distribution<int> d(w.begin(), w.end());
  return d(rng) + 1;
}

Policy greedy_q_policy(const nn::Mlp<double>& q_network, const ActionSpec& spec) {
  return [&q_network, spec](const Eigen::VectorXd& obs) {
    return split_index(static_cast<std::size_t>(nn::argmax(q_network.forward(obs))), spec);
  };
}

DqnResult dqn_train(const EnvFactory& make_env, const DqnConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  Env env = make_env();
  Env eval_env = make_env();
  const auto obs_dim = static_cast<int>(env.observation_size());
  const auto n_actions = static_cast<int>(env.num_actions());
  const ActionSpec spec = env.config().actions;

  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(n_actions);
  DqnResult result{nn::Mlp<double>(sizes), {}};
  nn::Mlp<double>& q = result.q_network;
  q.initialize(rng, 0.1);
  nn::Mlp<double> target = q;
  nn::Adam<double> adam(q.num_params(), {config.learning_rate, 0.9, 0.999, 1e-8, config.max_grad_norm});
  ReplayBuffer buffer(config.buffer_size, obs_dim);

  Eigen::VectorXd best_params = q.params();
  double best_return = -std::numeric_limits<double>::infinity();
  double loss_sum = 0.0;
  long loss_count = 0;
  double episode_economic = 0.0;
  double last_train_return = 0.0;

  // Transitions waiting for n-step returns; flushed at episode end.
  struct Pending {
    Eigen::VectorXd obs;
    std::size_t action;
    double reward;
  };
  std::deque<Pending> pending;
  const double bootstrap = std::pow(config.gamma, config.n_step);
  auto emit = [&](const Eigen::VectorXd& next_obs, bool done) {
    double g = 0.0;
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) g = it->reward + config.gamma * g;
    buffer.push(pending.front().obs, pending.front().action, g, next_obs, done);
    pending.pop_front();
  };

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_action(0, static_cast<std::size_t>(n_actions) - 1);
  std::size_t repeated = 0;
  int repeat_left = 0;

  Eigen::VectorXd obs = env.reset();
  nn::Mlp<double>::Cache cache;
  for (long step = 1; step <= config.total_steps; ++step) {
    const double eps = epsilon_at(step, config);
    std::size_t action = 0;
    if (config.exploration_zeta > 0) {
      action = repeat_left > 0 ? repeated : nn::argmax(q.forward(obs));
      if (repeat_left > 0) {
        --repeat_left;
      } else if (unit(rng) < eps) {
        repeated = pick_action(rng);
        action = repeated;
        repeat_left = zeta_duration(config.exploration_zeta, config.exploration_max_duration, rng) - 1;
      }
    } else {
      action = epsilon_greedy(q.forward(obs), eps, rng);
    }
    auto out = env.step(action);
    episode_economic += out.record.economic_reward();
    pending.push_back({obs, action, out.reward / config.reward_scale});
    if (out.done) {
      // Shorter tails are terminal, so their bootstrap factor is irrelevant.
      while (!pending.empty()) emit(out.observation, true);
    } else if (pending.size() == static_cast<std::size_t>(config.n_step)) {
      emit(out.observation, false);
    }
    if (out.done) {
      repeat_left = 0;
      last_train_return = episode_economic;
      episode_economic = 0.0;
      obs = env.reset();
    } else {
      obs = std::move(out.observation);
    }

    if (step >= config.learning_starts && step % config.train_freq == 0 && buffer.size() >= config.batch_size) {
      const auto batch = buffer.sample(config.batch_size, rng);
      const Eigen::VectorXd targets =
          config.double_q ? double_dqn_td_targets(batch.rewards, batch.dones, q.forward(batch.next_obs),
                                                  target.forward(batch.next_obs), bootstrap)
                          : dqn_td_targets(batch.rewards, batch.dones, target.forward(batch.next_obs), bootstrap);
      const Eigen::MatrixXd q_all = q.forward(batch.obs, cache);
      const auto n = static_cast<Eigen::Index>(config.batch_size);
      Eigen::VectorXd error(n);
      for (Eigen::Index k = 0; k < n; ++k)
        error[k] = q_all(static_cast<Eigen::Index>(batch.actions[static_cast<std::size_t>(k)]), k) - targets[k];
      const double loss = nn::huber(error) / static_cast<double>(n);
      if (!std::isfinite(loss)) throw std::runtime_error("dqn_train: non-finite loss, training diverged");
      const Eigen::VectorXd dloss = nn::huber_grad(error) / static_cast<double>(n);
      Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(n_actions, n);
      for (Eigen::Index k = 0; k < n; ++k)
        upstream(static_cast<Eigen::Index>(batch.actions[static_cast<std::size_t>(k)]), k) = dloss[k];
      adam.step(q.params(), q.backward(cache, upstream));
      loss_sum += loss;
      ++loss_count;
    }
    if (step % config.target_update == 0) target = q;

    if (step % config.eval_interval == 0 || step == config.total_steps) {
      const double eval_return = episode_return(greedy_q_policy(q, spec), eval_env);
      if (eval_return > best_return) {
        best_return = eval_return;
        best_params = q.params();
      }
      result.curve.points.push_back(
          {step, eval_return, last_train_return, loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0, eps});
      loss_sum = 0.0;
      loss_count = 0;
    }
  }
  if (config.keep_best) q.params() = best_params;
  return result;
}

}  // namespace p2g
