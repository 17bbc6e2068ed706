#pragma once

#include <vector>

#include "hnav/math.hpp"
#include "hnav/mlp.hpp"
#include "hnav/replay.hpp"
#include "hnav/sensing.hpp"

namespace hnav {

struct DdpgConfig {
  int width = 512;
  int hidden_layers = 3;
  double gamma = 0.99;
  double tau = 0.005;
  AdamConfig actor_adam{};
  AdamConfig critic_adam{};
  double ou_theta = 0.15;
  double ou_sigma = 0.2;
  double ou_dt = 1.0;
};

inline std::vector<int> hidden_dims(int in, int width, int hidden_layers, int out) {
  std::vector<int> dims{in};
  for (int i = 0; i < hidden_layers; ++i) dims.push_back(width);
  dims.push_back(out);
  return dims;
}

/// Stacks [state; action] for the critic input.
inline Matrix critic_input(const Matrix& s, const Matrix& a) {
  Matrix x(s.rows() + a.rows(), s.cols());
  x.topRows(s.rows()) = s;
  x.bottomRows(a.rows()) = a;
  return x;
}

struct DdpgLosses {
  double critic_loss = 0.0;
  double actor_objective = 0.0;  // mean Q(s, mu(s)) before the actor step
};

/// Deterministic actor-critic with target networks and OU exploration.
class DdpgAgent {
 public:
  static constexpr std::uint8_t kAlgoTag = 1;

  DdpgAgent(const DdpgConfig& cfg, Rng& init_rng)
      : cfg_(cfg),
        actor_(Mlp::init(hidden_dims(kObservationSize, cfg.width, cfg.hidden_layers, kActionSize),
                         Head::tanh, init_rng)),
        critic_(Mlp::init(hidden_dims(kObservationSize + kActionSize, cfg.width, cfg.hidden_layers, 1),
                          Head::linear, init_rng)),
        actor_target_(actor_),
        critic_target_(critic_),
        actor_opt_(actor_, cfg.actor_adam),
        critic_opt_(critic_, cfg.critic_adam),
        noise_(cfg.ou_theta, cfg.ou_sigma, cfg.ou_dt) {}

  /// Rebuild from stored networks (checkpoint load). Optimizer state starts fresh.
  DdpgAgent(const DdpgConfig& cfg, Mlp actor, Mlp critic, Mlp actor_target, Mlp critic_target)
      : cfg_(cfg),
        actor_(std::move(actor)),
        critic_(std::move(critic)),
        actor_target_(std::move(actor_target)),
        critic_target_(std::move(critic_target)),
        actor_opt_(actor_, cfg.actor_adam),
        critic_opt_(critic_, cfg.critic_adam),
        noise_(cfg.ou_theta, cfg.ou_sigma, cfg.ou_dt) {}

  void begin_episode() { noise_.reset(); }

  /// mu(s), plus per-channel OU noise when exploring; always clamped to [-1, 1].
  Action act(const Observation& obs, bool explore, Rng& rng) {
    Action a = actor_.forward(Matrix(obs)).col(0);
    if (explore) a += noise_.step(rng);
    return a.cwiseMax(-1.0).cwiseMin(1.0);
  }

  Action act_greedy(const Observation& obs) const {
    Action a = actor_.forward(Matrix(obs)).col(0);
    return a.cwiseMax(-1.0).cwiseMin(1.0);
  }

  Action act_explore(const Observation& obs, Rng& rng) { return act(obs, true, rng); }

  /// Bootstrapped critic targets y = r + gamma (1 - done) Q'(s', mu'(s')).
  Matrix critic_targets(const Minibatch& b) const {
    const Matrix a_next = actor_target_.forward(b.s_next);
    const Matrix q_next = critic_target_.forward(critic_input(b.s_next, a_next));
    return b.r.array() + cfg_.gamma * (1.0 - b.done.array()) * q_next.array();
  }

  DdpgLosses update(const Minibatch& b, Rng& /*unused*/) { return update(b); }

  DdpgLosses update(const Minibatch& b) {
    const double n = static_cast<double>(b.size());
    DdpgLosses out;

    const Matrix y = critic_targets(b);
    ForwardCache qc;
    const Matrix q = critic_.forward(critic_input(b.s, b.a), qc);
    const Matrix err = q - y;
    out.critic_loss = err.squaredNorm() / n;
    critic_opt_.step(critic_, critic_.backward(qc, (2.0 / n) * err));

    // Actor ascends mean Q(s, mu(s)) through the critic's input gradient.
    ForwardCache ac;
    const Matrix mu = actor_.forward(b.s, ac);
    ForwardCache pc;
    const Matrix q_pi = critic_.forward(critic_input(b.s, mu), pc);
    out.actor_objective = q_pi.mean();
    const MlpGradients cg = critic_.backward(pc, Matrix::Constant(1, b.size(), -1.0 / n), false);
    const Matrix grad_mu = cg.input.bottomRows(kActionSize);
    actor_opt_.step(actor_, actor_.backward(ac, grad_mu));

    soft_update(actor_target_, actor_, cfg_.tau);
    soft_update(critic_target_, critic_, cfg_.tau);
    return out;
  }

  const DdpgConfig& config() const { return cfg_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic_target() const { return critic_target_; }
  Mlp& mutable_critic() { return critic_; }
  Mlp& mutable_actor() { return actor_; }
  OuProcess3& noise() { return noise_; }

  /// Networks in checkpoint order.
  std::vector<const Mlp*> networks() const { return {&actor_, &critic_, &actor_target_, &critic_target_}; }

 private:
  DdpgConfig cfg_;
  Mlp actor_;
  Mlp critic_;
  Mlp actor_target_;
  Mlp critic_target_;
  Adam actor_opt_;
  Adam critic_opt_;
  OuProcess3 noise_;
};

}  // namespace hnav
