#pragma once

#include <random>

#include "p2g/nn.hpp"

namespace p2g_test {

/// Relative error `|g_a - g_n| / (|g_a| + |g_n|)` between the analytic gradient of
/// `sum(upstream .* mlp(x))` and central finite differences, on a random
/// network, batch and upstream gradient drawn from `rng`.
inline double mlp_gradient_error(std::mt19937_64& rng) {
  using Mat = Eigen::MatrixXd;
  std::uniform_int_distribution<int> width(1, 12), depth(0, 3), batch(1, 6);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<int> sizes{width(rng)};
  for (int l = depth(rng); l > 0; --l) sizes.push_back(width(rng));
  sizes.push_back(std::uniform_int_distribution<int>(1, 5)(rng));
  p2g::nn::Mlp<double> net(sizes);
  for (Eigen::Index i = 0; i < net.num_params(); ++i) net.params()[i] = 0.5 * normal(rng);

  const int n = batch(rng);
  Mat x(sizes.front(), n), up(sizes.back(), n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < up.size(); ++i) up.data()[i] = normal(rng);

  p2g::nn::Mlp<double>::Cache cache;
  net.forward(x, cache);
  const Eigen::VectorXd analytic = net.backward(cache, up);

  auto loss = [&] { return net.forward(x).cwiseProduct(up).sum(); };
  Eigen::VectorXd numeric(net.num_params());
  constexpr double h = 1e-6;
  for (Eigen::Index i = 0; i < net.num_params(); ++i) {
    const double keep = net.params()[i];
    net.params()[i] = keep + h;
    const double plus = loss();
    net.params()[i] = keep - h;
    const double minus = loss();
    net.params()[i] = keep;
    numeric[i] = (plus - minus) / (2 * h);
  }
  const double scale = analytic.norm() + numeric.norm();
  return scale > 0 ? (analytic - numeric).norm() / scale : 0.0;
}

}  // namespace p2g_test
