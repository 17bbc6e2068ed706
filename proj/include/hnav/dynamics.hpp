#pragma once

#include <algorithm>
#include <stdexcept>

#include "hnav/math.hpp"

namespace hnav {

/// Pose and velocity of the vehicle. World frame is z-up with the water
/// surface at z = 0; rotation maps body to world; angular velocity is in body.
struct RigidBodyState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 angular_velocity = Vec3::Zero();

  double yaw() const { return yaw_of(rotation); }
  bool finite() const {
    return position.allFinite() && velocity.allFinite() && rotation.allFinite() &&
           angular_velocity.allFinite();
  }
  bool operator==(const RigidBodyState&) const = default;
};

struct VehicleParams {
  double mass = 3.0;
  Vec3 inertia{0.03, 0.03, 0.05};
  double height = 0.30;
  double gravity = 9.81;
  double water_density = 1000.0;
  /// Buoyancy at full submersion as a fraction of weight.
  double buoyancy_ratio = 0.98;
  double air_drag_lin = 0.3;
  double air_drag_quad = 0.1;
  double water_drag_lin = 15.0;
  double water_drag_quad = 30.0;
  double air_rot_drag = 0.005;
  double water_rot_drag = 0.2;
  double added_mass_factor = 1.5;
  double max_thrust = 60.0;
  double max_torque = 2.0;

  double weight() const { return mass * gravity; }
  double displaced_volume() const { return buoyancy_ratio * mass / water_density; }

  void validate() const {
    if (!(mass > 0.0) || !(inertia.minCoeff() > 0.0) || !(height > 0.0)) {
      throw std::invalid_argument("VehicleParams: mass, inertia and height must be positive");
    }
    if (!(added_mass_factor >= 1.0)) {
      throw std::invalid_argument("VehicleParams: added_mass_factor must be >= 1");
    }
    if (!(max_thrust > 0.0) || !(max_torque > 0.0)) {
      throw std::invalid_argument("VehicleParams: actuator limits must be positive");
    }
  }
};

/// Effective medium properties for a given submersion.
struct MediumSample {
  double submerged_fraction = 0.0;
  double density = 0.0;
  double drag_lin = 0.0;
  double drag_quad = 0.0;
  double rot_drag = 0.0;
};

struct Wrench {
  Vec3 force = Vec3::Zero();   // world
  Vec3 torque = Vec3::Zero();  // body
};

class SimulationDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear blend over the vehicle height: 1 fully below, 0 fully above.
inline double submerged_fraction(double z_center, double height = 0.30) {
  const double half = 0.5 * height;
  if (z_center <= -half) return 1.0;
  if (z_center >= half) return 0.0;
  return (half - z_center) / height;
}

inline MediumSample medium_at(double z_center, const VehicleParams& p) {
  constexpr double kAirDensity = 1.225;
  const double f = submerged_fraction(z_center, p.height);
  auto blend = [f](double air, double water) { return (1.0 - f) * air + f * water; };
  return {f, blend(kAirDensity, p.water_density), blend(p.air_drag_lin, p.water_drag_lin),
          blend(p.air_drag_quad, p.water_drag_quad), blend(p.air_rot_drag, p.water_rot_drag)};
}

/// Gravity, buoyancy, translational drag against the moving medium, and
/// rotational damping. Wind acts above water, current below.
inline Wrench ambient_wrench(const RigidBodyState& s, const VehicleParams& p, const Vec3& wind,
                             const Vec3& current) {
  const MediumSample m = medium_at(s.position.z(), p);
  const double f = m.submerged_fraction;
  const Vec3 v_rel = s.velocity - (1.0 - f) * wind - f * current;
  Wrench w;
  w.force = Vec3(0.0, 0.0, -p.weight() + f * p.buoyancy_ratio * p.weight());
  w.force -= m.drag_lin * v_rel + m.drag_quad * v_rel.norm() * v_rel;
  w.torque = -m.rot_drag * s.angular_velocity;
  return w;
}

/// One semi-implicit Euler step. Thrust acts along body z.
inline RigidBodyState step_dynamics(const RigidBodyState& s, double thrust, const Vec3& torque,
                                    const VehicleParams& p, const Vec3& wind, const Vec3& current,
                                    double dt) {
  if (!(dt > 0.0 && dt <= 0.05)) throw std::invalid_argument("step_dynamics: dt must be in (0, 0.05]");
  constexpr double kSlack = 1e-9;
  if (!(thrust >= -kSlack && thrust <= p.max_thrust + kSlack)) {
    throw std::invalid_argument("step_dynamics: thrust outside [0, max_thrust]");
  }
  if (!(torque.cwiseAbs().maxCoeff() <= p.max_torque + kSlack)) {
    throw std::invalid_argument("step_dynamics: torque outside actuator limits");
  }

  const Wrench amb = ambient_wrench(s, p, wind, current);
  const double f = submerged_fraction(s.position.z(), p.height);
  const double eff_mass = p.mass * (1.0 + f * (p.added_mass_factor - 1.0));

  RigidBodyState n;
  const Vec3 accel = (s.rotation.col(2) * thrust + amb.force) / eff_mass;
  n.velocity = s.velocity + accel * dt;
  n.position = s.position + n.velocity * dt;

  const Vec3& j = p.inertia;
  const Vec3& om = s.angular_velocity;
  const Vec3 gyro = om.cross(j.cwiseProduct(om));
  const Vec3 om_dot = (torque - gyro + amb.torque).cwiseQuotient(j);
  n.angular_velocity = om + om_dot * dt;
  n.rotation = orthonormalize(s.rotation * exp_so3(n.angular_velocity * dt));

  if (!n.finite()) throw SimulationDiverged("step_dynamics: non-finite state");
  return n;
}

/// Per-axis OU wind (above water) and current (below water).
struct DisturbanceParams {
  double wind_theta = 0.5;
  double wind_sigma = 0.3;
  double current_theta = 0.5;
  double current_sigma = 0.05;
  bool enabled = true;
};

class Disturbances {
 public:
  Disturbances(const DisturbanceParams& p, double dt)
      : enabled_(p.enabled),
        wind_(p.wind_theta, p.wind_sigma, dt),
        current_(p.current_theta, p.current_sigma, dt) {}

  void step(Rng& rng) {
    if (!enabled_) return;
    wind_.step(rng);
    current_.step(rng);
  }
  void reset() {
    wind_.reset();
    current_.reset();
  }
  Vec3 wind() const { return enabled_ ? wind_.state() : Vec3::Zero(); }
  Vec3 current() const { return enabled_ ? current_.state() : Vec3::Zero(); }

 private:
  bool enabled_;
  OuProcess3 wind_;
  OuProcess3 current_;
};

}  // namespace hnav
