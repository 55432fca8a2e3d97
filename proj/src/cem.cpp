#include "p2g/cem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace p2g {

void CemConfig::validate() const {
  if (population <= 0 || iterations <= 0 || eval_interval <= 0)
    throw std::invalid_argument("cem: population, iterations and eval_interval must be positive");
  if (!(elite_fraction > 0 && elite_fraction <= 1)) throw std::invalid_argument("cem: elite_fraction must lie in (0,1]");
  if (initial_std < 0 || extra_noise < 0 || extra_noise_decay < 0)
    throw std::invalid_argument("cem: noise parameters must be nonnegative");
}

int CemConfig::num_elites() const {
  return std::max(1, static_cast<int>(std::lround(elite_fraction * population)));
}

void cem_refit(const Eigen::MatrixXd& elites, double extra_variance, Eigen::VectorXd& mean, Eigen::VectorXd& std) {
  mean = elites.rowwise().mean();
  const Eigen::VectorXd var = (elites.colwise() - mean).array().square().rowwise().mean();
  std = (var.array() + extra_variance).sqrt();
}

Policy argmax_policy(const nn::Mlp<double>& network, const ActionSpec& spec) {
  return [&network, spec](const Eigen::VectorXd& obs) {
    return split_index(static_cast<std::size_t>(nn::argmax(network.forward(obs))), spec);
  };
}

CemResult cem_train(const EnvFactory& make_env, const CemConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  Env env = make_env();
  env.set_training(false);
  const ActionSpec spec = env.config().actions;
  std::vector<int> sizes{static_cast<int>(env.observation_size())};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(static_cast<int>(env.num_actions()));

  CemResult result{nn::Mlp<double>(sizes), {}, {}};
  nn::Mlp<double> candidate(sizes);
  candidate.initialize(rng);
  const Eigen::Index dim = candidate.num_params();
  Eigen::VectorXd mean = candidate.params();
  Eigen::VectorXd std = Eigen::VectorXd::Constant(dim, config.initial_std);
  double extra = config.extra_noise;
  const int n_elite = config.num_elites();

  auto score = [&](const Eigen::VectorXd& params) {
    candidate.params() = params;
    return episode_return(argmax_policy(candidate, spec), env);
  };

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd elites(dim, 0);
  std::vector<double> elite_returns;
  Eigen::VectorXd best = mean;
  double best_return = -std::numeric_limits<double>::infinity();
  long env_steps = 0;

  for (int it = 0; it < config.iterations; ++it) {
    const Eigen::Index carried = config.elitism ? elites.cols() : 0;
    Eigen::MatrixXd pool(dim, config.population + carried);
    std::vector<double> returns(static_cast<std::size_t>(config.population + carried));
    for (int i = 0; i < config.population; ++i) {
      Eigen::VectorXd sample(dim);
      for (Eigen::Index j = 0; j < dim; ++j) sample[j] = mean[j] + std[j] * normal(rng);
      pool.col(i) = sample;
      returns[static_cast<std::size_t>(i)] = score(sample);
      env_steps += static_cast<long>(env.horizon());
    }
    // Deterministic episodes: carried elites keep their known returns.
    for (Eigen::Index c = 0; c < carried; ++c) {
      pool.col(config.population + c) = elites.col(c);
      returns[static_cast<std::size_t>(config.population + c)] = elite_returns[static_cast<std::size_t>(c)];
    }

    std::vector<std::size_t> rank(returns.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return returns[a] > returns[b]; });
    const auto k = static_cast<std::size_t>(std::min<Eigen::Index>(n_elite, pool.cols()));
    elites.resize(dim, static_cast<Eigen::Index>(k));
    elite_returns.assign(k, 0.0);
    for (std::size_t e = 0; e < k; ++e) {
      elites.col(static_cast<Eigen::Index>(e)) = pool.col(static_cast<Eigen::Index>(rank[e]));
      elite_returns[e] = returns[rank[e]];
    }
    if (elite_returns.front() > best_return) {
      best_return = elite_returns.front();
      best = elites.col(0);
    }
    cem_refit(elites, extra, mean, std);
    extra *= config.extra_noise_decay;

    const double elite_mean = std::accumulate(elite_returns.begin(), elite_returns.end(), 0.0) / static_cast<double>(k);
    result.elite_mean_returns.push_back(elite_mean);
    if ((it + 1) % config.eval_interval == 0 || it + 1 == config.iterations)
      result.curve.points.push_back({env_steps, best_return, elite_mean, 0.0, std.mean()});
  }
  result.policy.params() = best;
  return result;
}

}  // namespace p2g
