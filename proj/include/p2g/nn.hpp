#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace p2g::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Fully connected network, ReLU on hidden layers, linear output.
///
/// All weights and biases live in one flat parameter vector; layer `l`
/// stores its `out x in` weight matrix (column-major) followed by its bias.
/// Inputs are laid out one sample per column.
template <typename Scalar = double>
class Mlp {
 public:
  using MatrixType = Matrix<Scalar>;
  using VectorType = Vector<Scalar>;

  /// Activations of every layer for one batch, kept for the backward pass.
  struct Cache {
    std::vector<MatrixType> activations;  // activations[0] is the input
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least an input and an output size");
    Eigen::Index total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");
      offsets_.push_back(total);
      total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
    }
    params_ = VectorType::Zero(total);
  }

  /// He-uniform hidden layers; the output layer is scaled by `output_gain`.
  template <typename Rng>
  void initialize(Rng& rng, Scalar output_gain = Scalar(1)) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const Scalar bound = std::sqrt(Scalar(6) / static_cast<Scalar>(sizes_[l])) *
                           (l + 1 == num_layers() ? output_gain : Scalar(1));
      std::uniform_real_distribution<Scalar> u(-bound, bound);
      auto w = weight(l);
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
      bias(l).setZero();
    }
  }

  std::size_t num_layers() const { return offsets_.size(); }
  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  Eigen::Index num_params() const { return params_.size(); }

  VectorType& params() { return params_; }
  const VectorType& params() const { return params_; }

  Eigen::Map<MatrixType> weight(std::size_t l) {
    return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<const MatrixType> weight(std::size_t l) const {
    return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<VectorType> bias(std::size_t l) {
    return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
  }
  Eigen::Map<const VectorType> bias(std::size_t l) const {
    return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
  }

  MatrixType forward(const MatrixType& input) const {
    check_input(input);
    MatrixType x = input;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      MatrixType z = (weight(l) * x).colwise() + bias(l);
      if (l + 1 < num_layers()) z = z.cwiseMax(Scalar(0));
      x = std::move(z);
    }
    return x;
  }

  VectorType forward(const VectorType& input) const { return forward(MatrixType(input)).col(0); }

  MatrixType forward(const MatrixType& input, Cache& cache) const {
    check_input(input);
    cache.activations.resize(num_layers() + 1);
    cache.activations[0] = input;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      MatrixType z = (weight(l) * cache.activations[l]).colwise() + bias(l);
      if (l + 1 < num_layers()) z = z.cwiseMax(Scalar(0));
      cache.activations[l + 1] = std::move(z);
    }
    return cache.activations.back();
  }

  /// Gradient of `sum(upstream .* output)` with respect to the parameters,
  /// accumulated over the batch columns.
  VectorType backward(const Cache& cache, const MatrixType& upstream) const {
    if (cache.activations.size() != num_layers() + 1)
      throw std::invalid_argument("Mlp::backward: cache does not belong to a forward pass of this network");
    if (upstream.rows() != output_size() || upstream.cols() != cache.activations[0].cols())
      throw std::invalid_argument("Mlp::backward: upstream gradient has the wrong shape");
    VectorType grad = VectorType::Zero(num_params());
    MatrixType delta = upstream;
    for (std::size_t l = num_layers(); l-- > 0;) {
      const MatrixType& input = cache.activations[l];
      Eigen::Map<MatrixType>(grad.data() + offsets_[l], sizes_[l + 1], sizes_[l]) = delta * input.transpose();
      Eigen::Map<VectorType>(grad.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l],
                             sizes_[l + 1]) = delta.rowwise().sum();
      if (l > 0) {
        MatrixType back = weight(l).transpose() * delta;
        delta = (input.array() > Scalar(0)).select(back, Scalar(0));
      }
    }
    return grad;
  }

  bool finite() const { return params_.allFinite(); }

  /// Plain-text checkpoint: magic line, layer-size line, then one parameter per line.
  void save(std::ostream& out) const {
    out << "p2g-mlp 1\nlayers " << sizes_.size();
    for (int s : sizes_) out << ' ' << s;
    out << '\n' << std::setprecision(std::numeric_limits<Scalar>::max_digits10);
    for (Eigen::Index i = 0; i < params_.size(); ++i) out << params_[i] << '\n';
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    save(out);
  }

  static Mlp load(std::istream& in) {
    std::string magic;
    int version = 0;
    std::string tag;
    std::size_t count = 0;
    if (!(in >> magic >> version) || magic != "p2g-mlp" || version != 1)
      throw std::runtime_error("checkpoint: bad header");
    if (!(in >> tag >> count) || tag != "layers" || count < 2) throw std::runtime_error("checkpoint: bad layer line");
    std::vector<int> sizes(count);
    for (int& s : sizes)
      if (!(in >> s)) throw std::runtime_error("checkpoint: truncated layer sizes");
    Mlp net(sizes);
    for (Eigen::Index i = 0; i < net.params_.size(); ++i)
      if (!(in >> net.params_[i])) throw std::runtime_error("checkpoint: truncated parameters");
    return net;
  }

  static Mlp load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    return load(in);
  }

 private:
  void check_input(const MatrixType& input) const {
    if (input.rows() != input_size())
      throw std::invalid_argument("Mlp: input has " + std::to_string(input.rows()) + " rows, expected " +
                                  std::to_string(input_size()));
  }

  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  VectorType params_;
};

template <typename Scalar = double>
struct AdamConfig {
  Scalar learning_rate = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
  Scalar max_grad_norm = Scalar(0);  // 0 disables clipping
};

/// Adam with bias correction and optional global-norm clipping.
template <typename Scalar = double>
struct Adam {
  AdamConfig<Scalar> config;
  Vector<Scalar> m;
  Vector<Scalar> v;
  long step_count = 0;

  Adam() = default;
  Adam(Eigen::Index n, AdamConfig<Scalar> cfg) : config(cfg), m(Vector<Scalar>::Zero(n)), v(Vector<Scalar>::Zero(n)) {}

  void step(Vector<Scalar>& params, Vector<Scalar> grad) {
    if (grad.size() != params.size() || m.size() != params.size())
      throw std::invalid_argument("Adam::step: size mismatch");
    if (config.max_grad_norm > 0) {
      const Scalar norm = grad.norm();
      if (norm > config.max_grad_norm) grad *= config.max_grad_norm / norm;
    }
    ++step_count;
    m = config.beta1 * m + (Scalar(1) - config.beta1) * grad;
    v = config.beta2 * v + (Scalar(1) - config.beta2) * grad.cwiseAbs2();
    const Scalar c1 = Scalar(1) - std::pow(config.beta1, static_cast<Scalar>(step_count));
    const Scalar c2 = Scalar(1) - std::pow(config.beta2, static_cast<Scalar>(step_count));
    params.array() -= config.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + config.epsilon);
  }
};

/// Huber loss (delta = 1) summed over entries, and its derivative.
template <typename Derived>
typename Derived::Scalar huber(const Eigen::MatrixBase<Derived>& error) {
  using Scalar = typename Derived::Scalar;
  return error.unaryExpr([](Scalar e) {
                 const Scalar a = std::abs(e);
                 return a <= Scalar(1) ? Scalar(0.5) * e * e : a - Scalar(0.5);
               })
      .sum();
}

template <typename Derived>
auto huber_grad(const Eigen::MatrixBase<Derived>& error) {
  using Scalar = typename Derived::Scalar;
  return error.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
}

template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = logits.maxCoeff();
  Vector<Scalar> p = (logits.array() - top).exp().matrix();
  return p / p.sum();
}

template <typename Derived>
Vector<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = logits.maxCoeff();
  const Scalar lse = top + std::log((logits.array() - top).exp().sum());
  return (logits.array() - lse).matrix();
}

template <typename Derived>
typename Derived::Scalar categorical_logprob(const Eigen::MatrixBase<Derived>& logits, Eigen::Index index) {
  if (index < 0 || index >= logits.size()) throw std::out_of_range("categorical_logprob: index out of range");
  return log_softmax(logits)[index];
}

template <typename Derived>
typename Derived::Scalar categorical_entropy(const Eigen::MatrixBase<Derived>& logits) {
  const auto logp = log_softmax(logits);
  return -(logp.array().exp() * logp.array()).sum();
}

template <typename Derived, typename Rng>
Eigen::Index categorical_sample(const Eigen::MatrixBase<Derived>& logits, Rng& rng) {
  using Scalar = typename Derived::Scalar;
  const auto p = softmax(logits);
  std::uniform_real_distribution<Scalar> u(Scalar(0), Scalar(1));
  Scalar r = u(rng);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    r -= p[i];
    if (r < Scalar(0)) return i;
  }
  // rounding left a sliver: return the last index with nonzero mass
  for (Eigen::Index i = p.size(); i-- > 0;)
    if (p[i] > Scalar(0)) return i;
  return p.size() - 1;
}

/// First index of the maximum.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& values) {
  Eigen::Index best = 0;
  values.maxCoeff(&best);
  return best;
}

}  // namespace p2g::nn
