#include "p2g/ppo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace p2g {

double ppo_clip_objective(const Eigen::VectorXd& ratios, const Eigen::VectorXd& advantages, double clip_epsilon) {
  if (ratios.size() != advantages.size()) throw std::invalid_argument("ppo_clip_objective: length mismatch");
  if (ratios.size() == 0) return 0.0;
  const Eigen::ArrayXd unclipped = ratios.array() * advantages.array();
  const Eigen::ArrayXd clipped = ratios.array().cwiseMax(1.0 - clip_epsilon).cwiseMin(1.0 + clip_epsilon) *
                                 advantages.array();
  return unclipped.min(clipped).mean();
}

Eigen::VectorXd gae_advantages(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                               const Eigen::VectorXd& dones, double last_value, double gamma, double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n || dones.size() != n) throw std::invalid_argument("gae_advantages: length mismatch");
  Eigen::VectorXd adv(n);
  double running = 0.0;
  for (Eigen::Index t = n; t-- > 0;) {
    const double nonterminal = 1.0 - dones[t];
    const double next_value = t + 1 < n ? values[t + 1] : last_value;
    const double delta = rewards[t] + gamma * next_value * nonterminal - values[t];
    running = delta + gamma * lambda * nonterminal * running;
    adv[t] = running;
  }
  return adv;
}

void PpoConfig::validate() const {
  if (gamma < 0 || gamma > 1) throw std::invalid_argument("ppo: gamma must lie in [0,1]");
  if (gae_lambda < 0 || gae_lambda > 1) throw std::invalid_argument("ppo: gae_lambda must lie in [0,1]");
  if (!(clip_epsilon > 0)) throw std::invalid_argument("ppo: clip_epsilon must be positive");
  if (!(learning_rate > 0)) throw std::invalid_argument("ppo: learning_rate must be positive");
  if (rollout_steps <= 0 || epochs <= 0 || minibatch_size <= 0 || total_steps <= 0 || eval_interval <= 0)
    throw std::invalid_argument("ppo: step counts must be positive");
  if (!(reward_scale > 0)) throw std::invalid_argument("ppo: reward_scale must be positive");
}

namespace {

struct HeadLayout {
  std::array<Eigen::Index, 3> offset{};
  std::array<Eigen::Index, 3> size{};
};

HeadLayout head_layout(const ActionSpec& spec) {
  HeadLayout h;
  const auto sizes = spec.head_sizes();
  Eigen::Index off = 0;
  for (int k = 0; k < 3; ++k) {
    h.offset[static_cast<std::size_t>(k)] = off;
    h.size[static_cast<std::size_t>(k)] = static_cast<Eigen::Index>(sizes[static_cast<std::size_t>(k)]);
    off += h.size[static_cast<std::size_t>(k)];
  }
  return h;
}

std::size_t head_index(const ActionIndices& a, int k) { return k == 0 ? a.gt : (k == 1 ? a.p2g : a.bes); }

}  // namespace

Policy greedy_actor_policy(const nn::Mlp<double>& actor, const ActionSpec& spec) {
  const HeadLayout h = head_layout(spec);
  return [&actor, h](const Eigen::VectorXd& obs) {
    const Eigen::VectorXd logits = actor.forward(obs);
    std::array<std::size_t, 3> idx{};
    for (std::size_t k = 0; k < 3; ++k)
      idx[k] = static_cast<std::size_t>(nn::argmax(logits.segment(h.offset[k], h.size[k])));
    return ActionIndices{idx[0], idx[1], idx[2]};
  };
}

PpoResult ppo_train(const EnvFactory& make_env, const PpoConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  Env env = make_env();
  Env eval_env = make_env();
  const ActionSpec spec = env.config().actions;
  const HeadLayout heads = head_layout(spec);
  const auto obs_dim = static_cast<int>(env.observation_size());
  const auto n_logits = static_cast<int>(heads.offset[2] + heads.size[2]);

  std::vector<int> actor_sizes{obs_dim};
  actor_sizes.insert(actor_sizes.end(), config.hidden.begin(), config.hidden.end());
  std::vector<int> critic_sizes = actor_sizes;
  actor_sizes.push_back(n_logits);
  critic_sizes.push_back(1);

  PpoResult result{nn::Mlp<double>(actor_sizes), nn::Mlp<double>(critic_sizes), {}};
  nn::Mlp<double>& actor = result.actor;
  nn::Mlp<double>& critic = result.critic;
  actor.initialize(rng, 0.01);
  critic.initialize(rng, 1.0);
  const nn::AdamConfig<double> adam_cfg{config.learning_rate, 0.9, 0.999, 1e-8, config.max_grad_norm};
  nn::Adam<double> actor_opt(actor.num_params(), adam_cfg);
  nn::Adam<double> critic_opt(critic.num_params(), adam_cfg);

  const long n = config.rollout_steps;
  Eigen::MatrixXd obs_buf(obs_dim, n);
  std::vector<ActionIndices> act_buf(static_cast<std::size_t>(n));
  Eigen::VectorXd logp_buf(n), value_buf(n), reward_buf(n), done_buf(n);

  Eigen::VectorXd best_actor = actor.params();
  Eigen::VectorXd best_critic = critic.params();
  double best_return = -std::numeric_limits<double>::infinity();
  double episode_economic = 0.0;
  double last_train_return = 0.0;
  long next_eval = config.eval_interval;

  Eigen::VectorXd obs = env.reset();
  nn::Mlp<double>::Cache actor_cache, critic_cache;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));

  for (long steps_done = 0; steps_done < config.total_steps;) {
    // Collect a fresh on-policy rollout; it is discarded after the update.
    double entropy_sum = 0.0;
    for (long t = 0; t < n; ++t) {
      const Eigen::VectorXd logits = actor.forward(obs);
      ActionIndices a;
      double logp = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const auto seg = logits.segment(heads.offset[k], heads.size[k]);
        const auto idx = nn::categorical_sample(seg, rng);
        logp += nn::categorical_logprob(seg, idx);
        entropy_sum += nn::categorical_entropy(seg);
        (k == 0 ? a.gt : (k == 1 ? a.p2g : a.bes)) = static_cast<std::size_t>(idx);
      }
      obs_buf.col(t) = obs;
      act_buf[static_cast<std::size_t>(t)] = a;
      logp_buf[t] = logp;
      value_buf[t] = critic.forward(obs)[0];
      auto out = env.step(a);
      reward_buf[t] = out.reward / config.reward_scale;
      done_buf[t] = out.done ? 1.0 : 0.0;
      episode_economic += out.record.economic_reward();
      if (out.done) {
        last_train_return = episode_economic;
        episode_economic = 0.0;
        obs = env.reset();
      } else {
        obs = std::move(out.observation);
      }
    }
    steps_done += n;
    const double last_value = done_buf[n - 1] > 0 ? 0.0 : critic.forward(obs)[0];
    const Eigen::VectorXd advantages =
        gae_advantages(reward_buf, value_buf, done_buf, last_value, config.gamma, config.gae_lambda);
    const Eigen::VectorXd returns = advantages + value_buf;

    double loss_sum = 0.0;
    long loss_count = 0;
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (long start = 0; start < n; start += config.minibatch_size) {
        const long m = std::min(config.minibatch_size, n - start);
        Eigen::MatrixXd x(obs_dim, m);
        Eigen::VectorXd adv(m), ret(m);
        for (long i = 0; i < m; ++i) {
          const Eigen::Index src = order[static_cast<std::size_t>(start + i)];
          x.col(i) = obs_buf.col(src);
          adv[i] = advantages[src];
          ret[i] = returns[src];
        }
        if (config.normalize_advantages && m > 1) {
          const double mu = adv.mean();
          const double sd = std::sqrt((adv.array() - mu).square().mean());
          adv = (adv.array() - mu) / (sd + 1e-8);
        }

        const Eigen::MatrixXd logits = actor.forward(x, actor_cache);
        Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(n_logits, m);
        Eigen::VectorXd ratios(m);
        double entropy = 0.0;
        for (long i = 0; i < m; ++i) {
          const Eigen::Index src = order[static_cast<std::size_t>(start + i)];
          const ActionIndices& a = act_buf[static_cast<std::size_t>(src)];
          double logp = 0.0;
          for (std::size_t k = 0; k < 3; ++k) logp += nn::categorical_logprob(logits.col(i).segment(heads.offset[k], heads.size[k]),
                                                                              static_cast<Eigen::Index>(head_index(a, static_cast<int>(k))));
          const double ratio = std::exp(logp - logp_buf[src]);
          ratios[i] = ratio;
          const double clipped = std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon);
          // d(objective)/d(logp); zero where the clipped branch is active
          const double g = ratio * adv[i] <= clipped * adv[i] ? ratio * adv[i] : 0.0;
          for (std::size_t k = 0; k < 3; ++k) {
            const Eigen::VectorXd seg = logits.col(i).segment(heads.offset[k], heads.size[k]);
            const Eigen::VectorXd logp_head = nn::log_softmax(seg);
            const Eigen::VectorXd p = logp_head.array().exp();
            const double h = -(p.array() * logp_head.array()).sum();
            entropy += h;
            Eigen::VectorXd onehot = Eigen::VectorXd::Zero(heads.size[k]);
            onehot[static_cast<Eigen::Index>(head_index(a, static_cast<int>(k)))] = 1.0;
            const Eigen::VectorXd d_entropy = -(p.array() * (logp_head.array() + h)).matrix();
            d_logits.col(i).segment(heads.offset[k], heads.size[k]) =
                (-g * (onehot - p) - config.entropy_coef * d_entropy) / static_cast<double>(m);
          }
        }
        const double policy_loss = -ppo_clip_objective(ratios, adv, config.clip_epsilon);
        const Eigen::MatrixXd v = critic.forward(x, critic_cache);
        const Eigen::RowVectorXd v_err = v.row(0) - ret.transpose();
        const double value_loss = v_err.squaredNorm() / static_cast<double>(m);
        const double loss = policy_loss + config.value_coef * value_loss -
                            config.entropy_coef * entropy / static_cast<double>(m);
        if (!std::isfinite(loss)) throw std::runtime_error("ppo_train: non-finite loss, training diverged");
        actor_opt.step(actor.params(), actor.backward(actor_cache, d_logits));
        const Eigen::MatrixXd d_v = (2.0 * config.value_coef / static_cast<double>(m)) * v_err;
        critic_opt.step(critic.params(), critic.backward(critic_cache, d_v));
        loss_sum += loss;
        ++loss_count;
      }
    }

    if (steps_done >= next_eval || steps_done >= config.total_steps) {
      while (next_eval <= steps_done) next_eval += config.eval_interval;
      const double eval_return = episode_return(greedy_actor_policy(actor, spec), eval_env);
      if (eval_return > best_return) {
        best_return = eval_return;
        best_actor = actor.params();
        best_critic = critic.params();
      }
      result.curve.points.push_back({steps_done, eval_return, last_train_return,
                                     loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0,
                                     entropy_sum / static_cast<double>(n)});
    }
  }
  if (config.keep_best) {
    actor.params() = best_actor;
    critic.params() = best_critic;
  }
  return result;
}

}  // namespace p2g
