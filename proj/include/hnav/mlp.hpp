#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hnav/math.hpp"

namespace hnav {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Head : std::uint8_t { linear = 0, tanh = 1 };

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Activations kept by forward() for the matching backward().
/// Columns are samples.
struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
  Matrix output;
};

struct MlpGradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
  Matrix input;
};

/// Fully connected network: ReLU between hidden layers, tanh or linear head.
class Mlp {
 public:
  Mlp() = default;

  Mlp(const std::vector<int>& dims, Head head) : dims_(dims), head_(head) {
    if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
    for (int d : dims) {
      if (d <= 0) throw std::invalid_argument("Mlp: dims must be positive");
    }
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
      layers_.push_back({Matrix::Zero(dims[i + 1], dims[i]), Vector::Zero(dims[i + 1])});
    }
  }

  /// Hidden layers uniform in +-1/sqrt(fan_in), output layer uniform in +-3e-3.
  static Mlp init(const std::vector<int>& dims, Head head, Rng& rng, double final_scale = 3e-3) {
    Mlp net(dims, head);
    for (std::size_t l = 0; l < net.layers_.size(); ++l) {
      const bool last = l + 1 == net.layers_.size();
      const double bound = last ? final_scale : 1.0 / std::sqrt(static_cast<double>(dims[l]));
      DenseLayer& layer = net.layers_[l];
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = rng.uniform(-bound, bound);
      }
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = rng.uniform(-bound, bound);
    }
    return net;
  }

  int input_size() const { return dims_.front(); }
  int output_size() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  Head head() const { return head_; }
  std::size_t layer_count() const { return layers_.size(); }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  bool same_shape(const Mlp& o) const { return dims_ == o.dims_ && head_ == o.head_; }

  /// Batched forward pass; x is input_size x batch.
  Matrix forward(const Matrix& x) const {
    check_input(x);
    Matrix h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix z = layers_[l].weight * h;
      z.colwise() += layers_[l].bias;
      h = activate(std::move(z), l);
    }
    return h;
  }

  Matrix forward(const Matrix& x, ForwardCache& cache) const {
    check_input(x);
    cache.inputs.resize(layers_.size());
    cache.pre.resize(layers_.size());
    cache.inputs[0] = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix& z = cache.pre[l];
      z.noalias() = layers_[l].weight * cache.inputs[l];
      z.colwise() += layers_[l].bias;
      Matrix a = activate(z, l);
      if (l + 1 < layers_.size()) {
        cache.inputs[l + 1] = std::move(a);
      } else {
        cache.output = std::move(a);
      }
    }
    return cache.output;
  }

  Vector forward_one(const Vector& x) const { return forward(Matrix(x)).col(0); }

  /// Reverse-mode gradients of a scalar loss given dL/d(output).
  /// ReLU uses subgradient 0 at exactly 0. When want_params is false only
  /// the input gradient is produced.
  MlpGradients backward(const ForwardCache& cache, const Matrix& grad_output,
                        bool want_params = true) const {
    if (grad_output.rows() != output_size() || grad_output.cols() != cache.output.cols()) {
      throw std::invalid_argument("Mlp::backward: gradient shape mismatch");
    }
    MlpGradients g;
    if (want_params) {
      g.weight.resize(layers_.size());
      g.bias.resize(layers_.size());
    }
    Matrix delta = grad_output;
    if (head_ == Head::tanh) delta.array() *= 1.0 - cache.output.array().square();
    for (std::size_t l = layers_.size(); l-- > 0;) {
      if (want_params) {
        g.weight[l].noalias() = delta * cache.inputs[l].transpose();
        g.bias[l] = delta.rowwise().sum();
      }
      Matrix back;
      back.noalias() = layers_[l].weight.transpose() * delta;
      if (l > 0) {
        back.array() *= (cache.pre[l - 1].array() > 0.0).cast<double>();
      }
      delta = std::move(back);
    }
    g.input = std::move(delta);
    return g;
  }

  /// Flat parameter view in checkpoint order: per layer weights row-major, then biases.
  std::vector<double> flat_parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& l : layers_) {
      for (Eigen::Index i = 0; i < l.weight.rows(); ++i) {
        for (Eigen::Index j = 0; j < l.weight.cols(); ++j) out.push_back(l.weight(i, j));
      }
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) out.push_back(l.bias[i]);
    }
    return out;
  }

  void set_flat_parameters(const std::vector<double>& p) {
    if (p.size() != parameter_count()) throw std::invalid_argument("Mlp: parameter count mismatch");
    std::size_t k = 0;
    for (auto& l : layers_) {
      for (Eigen::Index i = 0; i < l.weight.rows(); ++i) {
        for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = p[k++];
      }
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = p[k++];
    }
  }

  bool operator==(const Mlp& o) const {
    if (!same_shape(o)) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (layers_[l].weight != o.layers_[l].weight || layers_[l].bias != o.layers_[l].bias) return false;
    }
    return true;
  }

 private:
  void check_input(const Matrix& x) const {
    if (x.rows() != input_size()) {
      throw std::invalid_argument("Mlp::forward: expected " + std::to_string(input_size()) +
                                  " inputs, got " + std::to_string(x.rows()));
    }
  }

  Matrix activate(Matrix z, std::size_t l) const {
    if (l + 1 < layers_.size()) return z.cwiseMax(0.0);
    if (head_ == Head::tanh) return z.array().tanh().matrix();
    return z;
  }

  std::vector<int> dims_;
  Head head_ = Head::linear;
  std::vector<DenseLayer> layers_;
};

/// theta_target <- tau * theta + (1 - tau) * theta_target
inline void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (!target.same_shape(online)) throw std::invalid_argument("soft_update: shape mismatch");
  auto& t = target.layers();
  const auto& o = online.layers();
  for (std::size_t l = 0; l < t.size(); ++l) {
    t[l].weight = tau * o[l].weight + (1.0 - tau) * t[l].weight;
    t[l].bias = tau * o[l].bias + (1.0 - tau) * t[l].bias;
  }
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction; moments shaped like the network's layers.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, const AdamConfig& cfg) : cfg_(cfg) {
    for (const auto& l : net.layers()) {
      m_w_.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      v_w_.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      m_b_.push_back(Vector::Zero(l.bias.size()));
      v_b_.push_back(Vector::Zero(l.bias.size()));
    }
  }

  void step(Mlp& net, const MlpGradients& g) {
    auto& layers = net.layers();
    if (g.weight.size() != layers.size() || m_w_.size() != layers.size()) {
      throw std::invalid_argument("Adam::step: shape mismatch");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weight, g.weight[l], m_w_[l], v_w_[l], c1, c2);
      update(layers[l].bias, g.bias[l], m_b_[l], v_b_[l], c1, c2);
    }
  }

  long step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<Matrix>& first_moment_weights() const { return m_w_; }
  const std::vector<Matrix>& second_moment_weights() const { return v_w_; }

 private:
  template <class P, class G, class M>
  void update(P& p, const G& g, M& m, M& v, double c1, double c2) const {
    if (p.rows() != g.rows() || p.cols() != g.cols()) throw std::invalid_argument("Adam::step: shape mismatch");
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    p.array() -= cfg_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.eps);
  }

  AdamConfig cfg_;
  std::vector<Matrix> m_w_, v_w_;
  std::vector<Vector> m_b_, v_b_;
  long t_ = 0;
};

/// Adam for a single scalar parameter (SAC temperature).
class ScalarAdam {
 public:
  explicit ScalarAdam(const AdamConfig& cfg = {}) : cfg_(cfg) {}
  double step(double p, double g) {
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * g;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * g * g;
    const double mh = m_ / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
    const double vh = v_ / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
    return p - cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
  }

 private:
  AdamConfig cfg_;
  double m_ = 0.0, v_ = 0.0;
  long t_ = 0;
};

}  // namespace hnav
