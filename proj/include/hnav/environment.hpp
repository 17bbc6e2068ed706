#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "hnav/controller.hpp"
#include "hnav/dynamics.hpp"
#include "hnav/math.hpp"
#include "hnav/sensing.hpp"

namespace hnav {

struct EpisodeConfig {
  int max_steps = 500;
  double c_d = 0.25;   // arrival margin, m
  double c_o = 0.5;    // collision range threshold, m
  double r_arrive = 100.0;
  double r_collide = -10.0;
  double agent_period = 0.2;  // s
  double physics_dt = 0.01;   // s
  /// Keep-out margin for sampled targets (tank faces and riser surfaces).
  double target_margin = 0.5;
  /// Distance from floor/ceiling at which moving toward it counts as contact.
  double contact_margin = 0.05;

  int substeps() const { return static_cast<int>(std::lround(agent_period / physics_dt)); }

  void validate() const {
    if (!(c_d > 0.0) || !(c_o > 0.0) || !(max_steps > 0)) {
      throw std::invalid_argument("EpisodeConfig: c_d, c_o and max_steps must be positive");
    }
    if (!(physics_dt > 0.0 && physics_dt <= 0.05) || substeps() < 1) {
      throw std::invalid_argument("EpisodeConfig: bad physics_dt / agent_period");
    }
  }
};

/// Everything that defines one simulated world besides the scene.
struct EnvConfig {
  EpisodeConfig episode;
  VehicleParams vehicle;
  ControllerGains gains;
  DisturbanceParams disturbances;
};

enum class StepEvent { none, arrived, collided, step_cap, out_of_bounds };

enum class FailureCause { none, wall, riser, floor, ceiling, out_of_bounds, diverged, step_cap };

inline const char* to_string(StepEvent e) {
  switch (e) {
    case StepEvent::none: return "none";
    case StepEvent::arrived: return "arrived";
    case StepEvent::collided: return "collided";
    case StepEvent::step_cap: return "step_cap";
    case StepEvent::out_of_bounds: return "out_of_bounds";
  }
  return "?";
}

inline const char* to_string(FailureCause c) {
  switch (c) {
    case FailureCause::none: return "none";
    case FailureCause::wall: return "wall";
    case FailureCause::riser: return "riser";
    case FailureCause::floor: return "floor";
    case FailureCause::ceiling: return "ceiling";
    case FailureCause::out_of_bounds: return "out_of_bounds";
    case FailureCause::diverged: return "diverged";
    case FailureCause::step_cap: return "step_cap";
  }
  return "?";
}

/// Raw actions in [-1, 1]^3 to physical velocity commands.
inline VelocityCommand scale_action(const Action& raw) {
  const Action a = raw.cwiseMax(-1.0).cwiseMin(1.0);
  return {0.125 * (a[0] + 1.0), 0.25 * a[1], 0.25 * a[2]};
}

/// Two-case reward: arrival bonus inside c_d, collision penalty below c_o,
/// collision winning when both hold, zero otherwise.
inline std::pair<double, StepEvent> reward(double d_t, double min_range, const EpisodeConfig& cfg) {
  if (min_range < cfg.c_o) return {cfg.r_collide, StepEvent::collided};
  if (d_t < cfg.c_d) return {cfg.r_arrive, StepEvent::arrived};
  return {0.0, StepEvent::none};
}

enum class Route { air2water, water2air };

inline Route parse_route(const std::string& s) {
  if (s == "air2water") return Route::air2water;
  if (s == "water2air") return Route::water2air;
  throw std::invalid_argument("unknown route '" + s + "' (expected air2water|water2air)");
}

inline const char* to_string(Route r) { return r == Route::air2water ? "air2water" : "water2air"; }

struct RouteEndpoints {
  Vec3 start;
  Vec3 target;
};

inline const Vec3 kTrainingStart{0.0, 0.0, 2.5};

inline RouteEndpoints route_endpoints(int scenario, Route route) {
  const Vec3 air = kTrainingStart;
  Vec3 water;
  if (scenario == 1) {
    water = {2.0, 3.0, -1.0};
  } else if (scenario == 2) {
    water = {3.6, -2.4, -1.0};
  } else {
    throw std::invalid_argument("unknown scenario " + std::to_string(scenario));
  }
  return route == Route::air2water ? RouteEndpoints{air, water} : RouteEndpoints{water, air};
}

/// Uniform over the tank shrunk by `margin`, rejecting points within
/// radius + margin of any riser axis.
inline Vec3 sample_target(const Scene& scene, Rng& rng, double margin = 0.5) {
  const Vec3 lo = scene.tank_min.array() + margin;
  const Vec3 hi = scene.tank_max.array() - margin;
  for (;;) {
    const Vec3 p(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()), rng.uniform(lo.z(), hi.z()));
    bool ok = true;
    for (const Riser& r : scene.risers) {
      const double keep = r.radius + margin;
      if (std::hypot(p.x() - r.x, p.y() - r.y) < keep) {
        ok = false;
        break;
      }
    }
    if (ok) return p;
  }
}

struct StepOutcome {
  Observation observation = Observation::Zero();
  double reward = 0.0;
  bool done = false;
  StepEvent event = StepEvent::none;
  /// True whenever the arrival guard fired this step, even if a step cap
  /// ended the episode at the same time.
  bool arrived = false;
  FailureCause cause = FailureCause::none;
  double min_range = 0.0;
  double target_distance = 0.0;
};

enum class Mode { training, evaluation };

/// Episode engine: owns scene, vehicle state, inner controller and
/// disturbances for one episode at a time.
class Environment {
 public:
  Environment(int scenario, const EnvConfig& cfg)
      : scenario_(scenario),
        scene_(scenario_scene(scenario)),
        cfg_(cfg),
        controller_(cfg.gains, cfg.vehicle),
        disturbances_(cfg.disturbances, cfg.episode.physics_dt) {
    cfg_.episode.validate();
    cfg_.vehicle.validate();
    scene_.validate();
  }

  /// Training episode: fixed start, random target.
  Observation reset_training(std::uint64_t seed) {
    target_rng_ = Rng::stream(seed, "target");
    start_common(kTrainingStart, seed);
    mode_ = Mode::training;
    target_ = sample_target(scene_, target_rng_, cfg_.episode.target_margin);
    return current_observation();
  }

  /// Evaluation trial on one of the fixed routes.
  Observation reset_evaluation(Route route, std::uint64_t seed) {
    const RouteEndpoints ep = route_endpoints(scenario_, route);
    start_common(ep.start, seed);
    mode_ = Mode::evaluation;
    target_ = ep.target;
    return current_observation();
  }

  Observation reset(Mode mode, Route route, std::uint64_t seed) {
    return mode == Mode::training ? reset_training(seed) : reset_evaluation(route, seed);
  }

  /// Agent step: scale the raw action and hold it for one agent period.
  StepOutcome step(const Action& raw_action) {
    require_active();
    const Action raw = raw_action.cwiseMax(-1.0).cwiseMin(1.0);
    const VelocityCommand cmd = scale_action(raw);
    const double yaw_ref = controller_.yaw_ref();
    last_command_ = cmd;
    StepOutcome out = advance([&](const RigidBodyState& s, double f) {
      return controller_.velocity_control(s, cmd, yaw_ref, f);
    });
    controller_.advance_yaw_ref(cmd.delta_yaw);
    prev_action_ = raw;
    out.observation = current_observation();
    return out;
  }

  /// Baseline step: the geometric controller chases the target directly.
  StepOutcome step_baseline() {
    require_active();
    last_command_ = {};
    StepOutcome out = advance([&](const RigidBodyState& s, double f) {
      return controller_.navigate_baseline(s, target_, f);
    });
    prev_action_ = Action::Zero();
    out.observation = current_observation();
    return out;
  }

  /// Terminal states may lie outside the tank; they are observed from the
  /// nearest interior point.
  Observation current_observation() const {
    RigidBodyState s = state_;
    s.position = s.position.cwiseMax(scene_.tank_min).cwiseMin(scene_.tank_max);
    return observe(scan(s, scene_), prev_action_, relative_target(s, target_));
  }

  const RigidBodyState& state() const { return state_; }
  void set_state(const RigidBodyState& s) { state_ = s; }
  const Vec3& target() const { return target_; }
  void set_target(const Vec3& t) { target_ = t; }
  const Scene& scene() const { return scene_; }
  const EnvConfig& config() const { return cfg_; }
  int scenario() const { return scenario_; }
  int steps() const { return steps_; }
  bool active() const { return active_; }
  double time() const { return steps_ * cfg_.episode.agent_period; }
  double t_air() const { return t_air_; }
  double t_under() const { return t_under_; }
  const Action& previous_action() const { return prev_action_; }
  const VelocityCommand& last_command() const { return last_command_; }
  double submerged() const { return submerged_fraction(state_.position.z(), cfg_.vehicle.height); }

 private:
  void start_common(const Vec3& start, std::uint64_t seed) {
    physics_rng_ = Rng::stream(seed, "physics");
    state_ = RigidBodyState{};
    state_.position = start;
    controller_.reset(0.0);
    disturbances_.reset();
    prev_action_ = Action::Zero();
    last_command_ = {};
    steps_ = 0;
    t_air_ = 0.0;
    t_under_ = 0.0;
    active_ = true;
  }

  void require_active() const {
    if (!active_) throw std::logic_error("Environment::step called on a finished episode");
  }

  template <class Commander>
  StepOutcome advance(Commander&& commander) {
    const EpisodeConfig& ep = cfg_.episode;
    StepOutcome out;
    std::optional<FailureCause> failure;

    for (int i = 0; i < ep.substeps() && !failure; ++i) {
      const double f = submerged_fraction(state_.position.z(), cfg_.vehicle.height);
      try {
        const ActuatorCommand u = commander(state_, f);
        disturbances_.step(physics_rng_);
        state_ = step_dynamics(state_, u.thrust, u.torque, cfg_.vehicle, disturbances_.wind(),
                               disturbances_.current(), ep.physics_dt);
      } catch (const SimulationDiverged&) {
        failure = FailureCause::diverged;
        break;
      }
      failure = containment_failure();
    }

    ++steps_;
    (state_.position.z() > scene_.water_level ? t_air_ : t_under_) += ep.agent_period;

    if (failure) {
      active_ = false;
      out.done = true;
      out.cause = *failure;
      const bool contact = *failure == FailureCause::floor || *failure == FailureCause::ceiling ||
                           *failure == FailureCause::riser;
      out.event = contact ? StepEvent::collided : StepEvent::out_of_bounds;
      out.reward = ep.r_collide;
      out.target_distance = (target_ - state_.position).norm();
      return out;
    }

    const RangeScan s = scan(state_, scene_);
    out.min_range = s.min_range();
    out.target_distance = (target_ - state_.position).norm();
    const auto [r, event] = reward(out.target_distance, out.min_range, ep);
    out.reward = r;
    out.event = event;

    if (event == StepEvent::collided) {
      out.done = true;
      out.cause = s.kinds[s.argmin()] == HitKind::riser ? FailureCause::riser : FailureCause::wall;
    } else if (event == StepEvent::arrived) {
      out.arrived = true;
      if (mode_ == Mode::training) {
        target_ = sample_target(scene_, target_rng_, ep.target_margin);
      }
    }

    if (!out.done && steps_ >= ep.max_steps) {
      out.done = true;
      out.event = StepEvent::step_cap;
      out.cause = FailureCause::step_cap;
    }
    active_ = !out.done;
    return out;
  }

  std::optional<FailureCause> containment_failure() const {
    const Vec3& p = state_.position;
    const Vec3& v = state_.velocity;
    if (!scene_.contains(p)) return FailureCause::out_of_bounds;
    if (scene_.riser_containing(p) >= 0) return FailureCause::riser;
    const double m = cfg_.episode.contact_margin;
    if (p.z() <= scene_.tank_min.z() + m && v.z() < 0.0) return FailureCause::floor;
    if (p.z() >= scene_.tank_max.z() - m && v.z() > 0.0) return FailureCause::ceiling;
    return std::nullopt;
  }

  int scenario_;
  Scene scene_;
  EnvConfig cfg_;
  GeometricController controller_;
  Disturbances disturbances_;
  Rng physics_rng_{0};
  Rng target_rng_{0};
  Mode mode_ = Mode::training;
  RigidBodyState state_;
  Vec3 target_ = Vec3::Zero();
  Action prev_action_ = Action::Zero();
  VelocityCommand last_command_;
  int steps_ = 0;
  double t_air_ = 0.0;
  double t_under_ = 0.0;
  bool active_ = false;
};

}  // namespace hnav
