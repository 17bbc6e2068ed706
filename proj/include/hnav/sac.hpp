#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "hnav/ddpg.hpp"
#include "hnav/math.hpp"
#include "hnav/mlp.hpp"
#include "hnav/replay.hpp"
#include "hnav/sensing.hpp"

namespace hnav {

struct SacConfig {
  int width = 512;
  int hidden_layers = 3;
  double gamma = 0.99;
  double tau = 0.005;
  AdamConfig actor_adam{};
  AdamConfig critic_adam{};
  AdamConfig alpha_adam{};
  double initial_alpha = 0.2;
  bool auto_alpha = true;
  double target_entropy = -3.0;
  double log_std_min = -20.0;
  double log_std_max = 2.0;
};

inline constexpr double kSquashEps = 1e-6;
inline const double kHalfLog2Pi = 0.5 * std::log(2.0 * kPi);

/// log N(u; mean, exp(log_std)) - log(1 - tanh(u)^2 + 1e-6) for one dimension.
inline double squashed_log_prob_1d(double u, double mean, double log_std) {
  const double z = (u - mean) / std::exp(log_std);
  const double t = std::tanh(u);
  return -0.5 * z * z - log_std - kHalfLog2Pi - std::log(1.0 - t * t + kSquashEps);
}

struct SacLosses {
  double q1_loss = 0.0;
  double q2_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;  // -mean log pi on the actor batch
};

/// Stochastic actor-critic with a tanh-squashed Gaussian policy, twin
/// critics with target copies, and optional temperature auto-tuning.
class SacAgent {
 public:
  static constexpr std::uint8_t kAlgoTag = 2;

  struct Sample {
    Action action;
    double log_prob = 0.0;
  };

  SacAgent(const SacConfig& cfg, Rng& init_rng)
      : cfg_(cfg),
        actor_(Mlp::init(hidden_dims(kObservationSize, cfg.width, cfg.hidden_layers, 2 * kActionSize),
                         Head::linear, init_rng)),
        q1_(Mlp::init(critic_dims(cfg), Head::linear, init_rng)),
        q2_(Mlp::init(critic_dims(cfg), Head::linear, init_rng)),
        q1_target_(q1_),
        q2_target_(q2_),
        actor_opt_(actor_, cfg.actor_adam),
        q1_opt_(q1_, cfg.critic_adam),
        q2_opt_(q2_, cfg.critic_adam),
        alpha_opt_(cfg.alpha_adam),
        log_alpha_(std::log(cfg.initial_alpha)) {}

  SacAgent(const SacConfig& cfg, Mlp actor, Mlp q1, Mlp q2, Mlp q1_target, Mlp q2_target, double log_alpha)
      : cfg_(cfg),
        actor_(std::move(actor)),
        q1_(std::move(q1)),
        q2_(std::move(q2)),
        q1_target_(std::move(q1_target)),
        q2_target_(std::move(q2_target)),
        actor_opt_(actor_, cfg.actor_adam),
        q1_opt_(q1_, cfg.critic_adam),
        q2_opt_(q2_, cfg.critic_adam),
        alpha_opt_(cfg.alpha_adam),
        log_alpha_(log_alpha) {}

  static std::vector<int> critic_dims(const SacConfig& cfg) {
    return hidden_dims(kObservationSize + kActionSize, cfg.width, cfg.hidden_layers, 1);
  }

  void begin_episode() {}

  double alpha() const { return std::exp(log_alpha_); }
  double log_alpha() const { return log_alpha_; }
  void set_alpha(double a) { log_alpha_ = std::log(a); }

  /// Splits actor output into (mean, clamped log-std).
  std::pair<Matrix, Matrix> policy_params(const Matrix& head_out) const {
    Matrix mean = head_out.topRows(kActionSize);
    Matrix log_std = head_out.bottomRows(kActionSize).cwiseMax(cfg_.log_std_min).cwiseMin(cfg_.log_std_max);
    return {std::move(mean), std::move(log_std)};
  }

  /// Stochastic: u ~ N(mean, std), a = tanh(u). Deterministic: a = tanh(mean).
  Sample act(const Observation& obs, bool stochastic, Rng& rng) const {
    const auto [mean, log_std] = policy_params(actor_.forward(Matrix(obs)));
    Sample s;
    double lp = 0.0;
    for (int i = 0; i < kActionSize; ++i) {
      const double u = stochastic ? mean(i, 0) + std::exp(log_std(i, 0)) * rng.normal() : mean(i, 0);
      s.action[i] = std::tanh(u);
      lp += squashed_log_prob_1d(u, mean(i, 0), log_std(i, 0));
    }
    s.log_prob = lp;
    s.action = s.action.cwiseMax(-1.0).cwiseMin(1.0);
    return s;
  }

  Action act_greedy(const Observation& obs) const {
    Rng unused(0);
    return act(obs, false, unused).action;
  }
  Action act_explore(const Observation& obs, Rng& rng) const { return act(obs, true, rng).action; }

  /// y = r + gamma (1 - done) (min(Q1', Q2')(s', a') - alpha log pi(a'|s')).
  Matrix critic_targets(const Minibatch& b, Rng& rng) const {
    const auto [mean, log_std] = policy_params(actor_.forward(b.s_next));
    const Eigen::Index n = b.size();
    Matrix a_next(kActionSize, n);
    Matrix logp = Matrix::Zero(1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (int i = 0; i < kActionSize; ++i) {
        const double u = mean(i, j) + std::exp(log_std(i, j)) * rng.normal();
        a_next(i, j) = std::tanh(u);
        logp(0, j) += squashed_log_prob_1d(u, mean(i, j), log_std(i, j));
      }
    }
    const Matrix x = critic_input(b.s_next, a_next);
    const Matrix q_min = q1_target_.forward(x).cwiseMin(q2_target_.forward(x));
    return b.r.array() + cfg_.gamma * (1.0 - b.done.array()) * (q_min.array() - alpha() * logp.array());
  }

  SacLosses update(const Minibatch& b, Rng& rng) {
    const double n = static_cast<double>(b.size());
    const Eigen::Index cols = b.size();
    SacLosses out;

    const Matrix y = critic_targets(b, rng);
    const Matrix x = critic_input(b.s, b.a);
    {
      ForwardCache c1, c2;
      const Matrix e1 = q1_.forward(x, c1) - y;
      const Matrix e2 = q2_.forward(x, c2) - y;
      out.q1_loss = e1.squaredNorm() / n;
      out.q2_loss = e2.squaredNorm() / n;
      q1_opt_.step(q1_, q1_.backward(c1, (2.0 / n) * e1));
      q2_opt_.step(q2_, q2_.backward(c2, (2.0 / n) * e2));
    }

    Matrix eps(kActionSize, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (int i = 0; i < kActionSize; ++i) eps(i, j) = rng.normal();
    }
    MlpGradients actor_grad;
    double mean_logp = 0.0;
    out.actor_loss = actor_objective(b.s, eps, &actor_grad, &mean_logp);
    actor_opt_.step(actor_, actor_grad);
    out.entropy = -mean_logp;

    if (cfg_.auto_alpha) {
      // d/dlog_alpha of -log_alpha * (log pi + target_entropy), detached.
      const double grad = -(mean_logp + cfg_.target_entropy);
      log_alpha_ = alpha_opt_.step(log_alpha_, grad);
    }
    out.alpha = alpha();

    soft_update(q1_target_, q1_, cfg_.tau);
    soft_update(q2_target_, q2_, cfg_.tau);
    return out;
  }

  /// Reparameterized actor loss E[alpha log pi(a|s) - min(Q1, Q2)(s, a)] with
  /// a = tanh(mean + std * eps) for the given standard-normal draws. When grad
  /// is non-null it receives the gradient w.r.t. the actor parameters.
  double actor_objective(const Matrix& s, const Matrix& eps, MlpGradients* grad,
                         double* mean_logp = nullptr) const {
    const Eigen::Index cols = s.cols();
    const double n = static_cast<double>(cols);
    const double alpha_now = alpha();
    ForwardCache ac;
    const Matrix head = actor_.forward(s, ac);
    const auto [mean, log_std] = policy_params(head);
    Matrix a(kActionSize, cols);
    Matrix logp = Matrix::Zero(1, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (int i = 0; i < kActionSize; ++i) {
        const double u = mean(i, j) + std::exp(log_std(i, j)) * eps(i, j);
        a(i, j) = std::tanh(u);
        logp(0, j) += squashed_log_prob_1d(u, mean(i, j), log_std(i, j));
      }
    }

    const Matrix xa = critic_input(s, a);
    ForwardCache p1, p2;
    const Matrix v1 = q1_.forward(xa, p1);
    const Matrix v2 = q2_.forward(xa, p2);
    Matrix g1 = Matrix::Zero(1, cols), g2 = Matrix::Zero(1, cols);
    double q_min_sum = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      // -min(Q1, Q2): the gradient flows through the smaller critic only.
      if (v1(0, j) <= v2(0, j)) {
        g1(0, j) = -1.0 / n;
        q_min_sum += v1(0, j);
      } else {
        g2(0, j) = -1.0 / n;
        q_min_sum += v2(0, j);
      }
    }
    if (mean_logp) *mean_logp = logp.mean();
    const double loss = alpha_now * logp.mean() - q_min_sum / n;
    if (!grad) return loss;

    const Matrix dq_da = q1_.backward(p1, g1, false).input.bottomRows(kActionSize) +
                         q2_.backward(p2, g2, false).input.bottomRows(kActionSize);
    Matrix grad_head = Matrix::Zero(2 * kActionSize, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (int i = 0; i < kActionSize; ++i) {
        const double t = a(i, j);
        const double one_m_t2 = 1.0 - t * t;
        const double dcorr_du = 2.0 * t * one_m_t2 / (one_m_t2 + kSquashEps);
        const double dl_du = alpha_now / n * dcorr_du + dq_da(i, j) * one_m_t2;
        grad_head(i, j) = dl_du;
        const double raw_ls = head(kActionSize + i, j);
        const bool clamped = raw_ls < cfg_.log_std_min || raw_ls > cfg_.log_std_max;
        const double sigma = std::exp(log_std(i, j));
        grad_head(kActionSize + i, j) = clamped ? 0.0 : dl_du * sigma * eps(i, j) - alpha_now / n;
      }
    }
    *grad = actor_.backward(ac, grad_head);
    return loss;
  }

  const SacConfig& config() const { return cfg_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& q1() const { return q1_; }
  const Mlp& q2() const { return q2_; }
  const Mlp& q1_target() const { return q1_target_; }
  const Mlp& q2_target() const { return q2_target_; }
  Mlp& mutable_actor() { return actor_; }
  Mlp& mutable_q1() { return q1_; }
  Mlp& mutable_q2() { return q2_; }

  std::vector<const Mlp*> networks() const { return {&actor_, &q1_, &q2_, &q1_target_, &q2_target_}; }

 private:
  SacConfig cfg_;
  Mlp actor_;
  Mlp q1_, q2_;
  Mlp q1_target_, q2_target_;
  Adam actor_opt_;
  Adam q1_opt_, q2_opt_;
  ScalarAdam alpha_opt_;
  double log_alpha_;
};

}  // namespace hnav
