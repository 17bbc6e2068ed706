#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hnav/dynamics.hpp"
#include "hnav/math.hpp"

namespace hnav {

struct ControllerGains {
  double k_x = 12.0;
  double k_v = 8.0;
  double k_R = 4.0;
  double k_omega = 0.8;
  /// Multiplier applied to every gain at full submersion, blended linearly.
  double water_scale = 2.5;
  /// Maximum angle between the commanded thrust axis and world z.
  double max_tilt = deg2rad(85.0);

  void validate() const {
    if (!(k_x > 0 && k_v > 0 && k_R > 0 && k_omega > 0 && water_scale > 0)) {
      throw std::invalid_argument("ControllerGains: all gains must be positive");
    }
    if (!(max_tilt > 0.0 && max_tilt < 0.5 * kPi)) {
      throw std::invalid_argument("ControllerGains: max_tilt must lie in (0, pi/2)");
    }
  }
};

/// Agent-level command, already scaled to physical units.
struct VelocityCommand {
  double v_forward = 0.0;  // m/s, [0, 0.25]
  double v_z = 0.0;        // m/s, [-0.25, 0.25]
  double delta_yaw = 0.0;  // rad, [-0.25, 0.25]

  static constexpr double kMaxLinear = 0.25;
  static constexpr double kMaxYaw = 0.25;

  VelocityCommand clamped() const {
    return {std::clamp(v_forward, 0.0, kMaxLinear), std::clamp(v_z, -kMaxLinear, kMaxLinear),
            std::clamp(delta_yaw, -kMaxYaw, kMaxYaw)};
  }
};

struct ActuatorCommand {
  double thrust = 0.0;
  Vec3 torque = Vec3::Zero();
};

/// Geometric tracking controller on SE(3) (thrust from translational error,
/// torque from the rotation-matrix attitude error), gain-scheduled by the
/// submerged fraction.
///
/// Holds the only per-simulation state the inner loop needs: the last valid
/// attitude target (used when the desired force degenerates) and the
/// accumulated yaw reference driven by delta-yaw commands.
class GeometricController {
 public:
  GeometricController(const ControllerGains& gains, const VehicleParams& params)
      : gains_(gains), params_(params) {
    gains_.validate();
  }

  void reset(double yaw) {
    yaw_ref_ = yaw;
    last_target_ = rot_z(yaw);
  }

  double yaw_ref() const { return yaw_ref_; }
  void advance_yaw_ref(double delta) { yaw_ref_ = wrap_angle(yaw_ref_ + delta); }
  const ControllerGains& gains() const { return gains_; }
  const Mat3& last_attitude_target() const { return last_target_; }

  double gain_scale(double f_sub) const { return 1.0 + f_sub * (gains_.water_scale - 1.0); }

  /// Net-weight feedforward: weight minus buoyancy at the given submersion.
  double weight_feedforward(double f_sub) const {
    return params_.weight() - f_sub * params_.buoyancy_ratio * params_.weight();
  }

  /// Medium drag at the desired velocity, so steady tracking needs no error.
  Vec3 drag_feedforward(const Vec3& v_des, double f_sub) const {
    const double lin = (1.0 - f_sub) * params_.air_drag_lin + f_sub * params_.water_drag_lin;
    const double quad = (1.0 - f_sub) * params_.air_drag_quad + f_sub * params_.water_drag_quad;
    return lin * v_des + quad * v_des.norm() * v_des;
  }

  /// Desired thrust force before attitude projection, with the tilt limit applied.
  Vec3 desired_force(const Vec3& e_x, const Vec3& e_v, double f_sub, const Vec3& v_des = Vec3::Zero()) const {
    const double s = gain_scale(f_sub);
    Vec3 a = -s * gains_.k_x * e_x - s * gains_.k_v * e_v + weight_feedforward(f_sub) * Vec3::UnitZ() +
             drag_feedforward(v_des, f_sub);
    const double horiz = std::hypot(a.x(), a.y());
    const double tan_max = std::tan(gains_.max_tilt);
    // Tilt limit keeps the horizontal demand and raises the vertical part;
    // thrust cannot point downward.
    if (horiz < 1e-12) {
      a.z() = std::max(a.z(), 0.0);
      return a;
    }
    a.z() = std::max(a.z(), horiz / tan_max);
    return a;
  }

  /// Attitude target whose z axis is b3 and whose heading matches yaw.
  static Mat3 attitude_target(const Vec3& b3, double yaw) {
    const Vec3 y_c(-std::sin(yaw), std::cos(yaw), 0.0);
    Vec3 b1 = y_c.cross(b3);
    b1.normalize();
    const Vec3 b2 = b3.cross(b1);
    Mat3 rd;
    rd.col(0) = b1;
    rd.col(1) = b2;
    rd.col(2) = b3;
    return rd;
  }

  static Vec3 attitude_error(const Mat3& r_des, const Mat3& r) {
    const Mat3 x = r_des.transpose() * r;
    return 0.5 * vee(x - x.transpose());
  }

  ActuatorCommand position_control(const RigidBodyState& s, const Vec3& x_des, const Vec3& v_des,
                                   double yaw_des, double f_sub) {
    return control(s, s.position - x_des, v_des, yaw_des, f_sub);
  }

  /// Velocity mode: heading yaw_ref + delta_yaw, planar speed along it.
  ActuatorCommand velocity_control(const RigidBodyState& s, const VelocityCommand& raw_cmd,
                                   double yaw_ref, double f_sub) {
    const VelocityCommand cmd = raw_cmd.clamped();
    const double heading = yaw_ref + cmd.delta_yaw;
    return control(s, Vec3::Zero(), desired_velocity(cmd, yaw_ref), heading, f_sub);
  }

  static Vec3 desired_velocity(const VelocityCommand& raw_cmd, double yaw_ref) {
    const VelocityCommand cmd = raw_cmd.clamped();
    const double heading = yaw_ref + cmd.delta_yaw;
    return {cmd.v_forward * std::cos(heading), cmd.v_forward * std::sin(heading), cmd.v_z};
  }

  /// Setpoint the baseline chases: the goal, or a point at most `carrot` metres
  /// ahead on the straight segment toward it.
  static Vec3 carrot_point(const Vec3& position, const Vec3& goal, double carrot = 0.5) {
    const Vec3 d = goal - position;
    const double n = d.norm();
    if (n <= carrot) return goal;
    return position + d * (carrot / n);
  }

  ActuatorCommand navigate_baseline(const RigidBodyState& s, const Vec3& goal, double f_sub) {
    return position_control(s, carrot_point(s.position, goal), Vec3::Zero(), s.yaw(), f_sub);
  }

 private:
  ActuatorCommand control(const RigidBodyState& s, const Vec3& e_x, const Vec3& v_des, double yaw_des,
                          double f_sub) {
    const Vec3 a = desired_force(e_x, s.velocity - v_des, f_sub, v_des);
    const Mat3& r = s.rotation;

    ActuatorCommand out;
    out.thrust = std::clamp(a.dot(r.col(2)), 0.0, params_.max_thrust);

    Mat3 r_des = last_target_;
    if (a.norm() >= 1e-6) {
      r_des = attitude_target(a.normalized(), yaw_des);
      last_target_ = r_des;
    }

    const double k = gain_scale(f_sub);
    const Vec3& om = s.angular_velocity;
    const Vec3 e_r = attitude_error(r_des, r);
    const Vec3 tau = -k * gains_.k_R * e_r - k * gains_.k_omega * om +
                     om.cross(params_.inertia.cwiseProduct(om));
    out.torque = tau.cwiseMax(-params_.max_torque).cwiseMin(params_.max_torque);
    return out;
  }

  ControllerGains gains_;
  VehicleParams params_;
  Mat3 last_target_ = Mat3::Identity();
  double yaw_ref_ = 0.0;
};

}  // namespace hnav
