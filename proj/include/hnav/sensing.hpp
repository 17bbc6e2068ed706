#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hnav/dynamics.hpp"
#include "hnav/math.hpp"

namespace hnav {

/// Vertical cylinder spanning the full tank height.
struct Riser {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.35;
};

struct Scene {
  Vec3 tank_min{-5.0, -5.0, -1.0};
  Vec3 tank_max{5.0, 5.0, 5.0};
  double water_level = 0.0;
  std::vector<Riser> risers;

  bool contains(const Vec3& p) const {
    return (p.array() >= tank_min.array()).all() && (p.array() <= tank_max.array()).all();
  }

  /// Index of the riser whose body contains p in the x-y plane, or -1.
  int riser_containing(const Vec3& p) const {
    for (std::size_t i = 0; i < risers.size(); ++i) {
      const double dx = p.x() - risers[i].x;
      const double dy = p.y() - risers[i].y;
      if (dx * dx + dy * dy < risers[i].radius * risers[i].radius) return static_cast<int>(i);
    }
    return -1;
  }

  void validate() const {
    if (!((tank_max - tank_min).minCoeff() > 0.0)) throw std::invalid_argument("Scene: empty tank");
    for (const auto& r : risers) {
      if (!(r.radius > 0.0) || r.x - r.radius < tank_min.x() || r.x + r.radius > tank_max.x() ||
          r.y - r.radius < tank_min.y() || r.y + r.radius > tank_max.y()) {
        throw std::invalid_argument("Scene: riser outside tank");
      }
    }
  }
};

/// Scenario 1: empty 10 x 10 x 6 m tank, 1 m water column.
inline Scene empty_tank() { return Scene{}; }

/// Scenario 2: the tank plus four risers; (1.8, -1.2) sits on the straight
/// route from the start to the evaluation target.
inline Scene riser_tank(double radius = 0.35) {
  Scene s;
  s.risers = {{1.8, -1.2, radius}, {-1.8, 1.2, radius}, {1.2, 1.8, radius}, {-1.2, -1.8, radius}};
  return s;
}

inline Scene scenario_scene(int scenario) {
  if (scenario == 1) return empty_tank();
  if (scenario == 2) return riser_tank();
  throw std::invalid_argument("unknown scenario " + std::to_string(scenario));
}

class OutsideScene : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class HitKind { none, wall, riser };

struct RayHit {
  double distance = 0.0;
  HitKind kind = HitKind::none;
  int riser = -1;
};

inline constexpr double kRangeMax = 10.0;
inline constexpr double kRangeMin = 1e-6;
inline constexpr int kBeamCount = 20;

/// Analytic ray cast against the tank interior and the riser cylinders.
/// Misses are reported at r_max with kind none.
inline RayHit raycast_hit(const Vec3& origin, const Vec3& dir, const Scene& scene,
                          double r_max = kRangeMax) {
  if (!scene.contains(origin)) throw OutsideScene("raycast: origin outside tank");
  if (std::abs(dir.norm() - 1.0) > 1e-9) throw std::invalid_argument("raycast: direction must be unit");

  RayHit hit{std::numeric_limits<double>::infinity(), HitKind::none, -1};
  for (int i = 0; i < 3; ++i) {
    double t = std::numeric_limits<double>::infinity();
    if (dir[i] > 0.0) t = (scene.tank_max[i] - origin[i]) / dir[i];
    if (dir[i] < 0.0) t = (scene.tank_min[i] - origin[i]) / dir[i];
    if (t < hit.distance) hit = {t, HitKind::wall, -1};
  }

  // |o + t d - c|^2 = r^2 in the x-y plane.
  const double a = dir.x() * dir.x() + dir.y() * dir.y();
  for (std::size_t k = 0; k < scene.risers.size(); ++k) {
    const Riser& r = scene.risers[k];
    const double ox = origin.x() - r.x;
    const double oy = origin.y() - r.y;
    const double c = ox * ox + oy * oy - r.radius * r.radius;
    if (c <= 0.0) {
      hit = {0.0, HitKind::riser, static_cast<int>(k)};
      continue;
    }
    if (a <= 0.0) continue;
    const double b = ox * dir.x() + oy * dir.y();
    const double disc = b * b - a * c;
    if (b >= 0.0 || disc < 0.0) continue;
    // Entry root, written to avoid cancellation.
    const double t = c / (-b + std::sqrt(disc));
    if (t < hit.distance) hit = {t, HitKind::riser, static_cast<int>(k)};
  }

  if (hit.distance > r_max) return {r_max, HitKind::none, -1};
  hit.distance = std::max(hit.distance, kRangeMin);
  return hit;
}

inline double raycast(const Vec3& origin, const Vec3& dir, const Scene& scene,
                      double r_max = kRangeMax) {
  return raycast_hit(origin, dir, scene, r_max).distance;
}

/// Beam azimuth relative to the heading: a centered grid of 20 beams 13.5 deg apart.
inline double beam_angle(int k) { return deg2rad(-128.25 + 13.5 * k); }

struct RangeScan {
  std::array<double, kBeamCount> ranges{};
  std::array<HitKind, kBeamCount> kinds{};

  double min_range() const { return *std::min_element(ranges.begin(), ranges.end()); }
  int argmin() const {
    return static_cast<int>(std::min_element(ranges.begin(), ranges.end()) - ranges.begin());
  }
};

/// Horizontal-plane scan at the vehicle's altitude, aligned with its yaw.
inline RangeScan scan(const RigidBodyState& state, const Scene& scene) {
  RangeScan out;
  const double psi = state.yaw();
  for (int k = 0; k < kBeamCount; ++k) {
    const double az = psi + beam_angle(k);
    const Vec3 dir(std::cos(az), std::sin(az), 0.0);
    const RayHit h = raycast_hit(state.position, dir, scene);
    out.ranges[k] = h.distance;
    out.kinds[k] = h.kind;
  }
  return out;
}

struct TargetInfo {
  double distance = 0.0;
  double bearing_error = 0.0;
  double elevation_angle = 0.0;
};

inline TargetInfo relative_target(const RigidBodyState& state, const Vec3& target) {
  const Vec3 d = target - state.position;
  TargetInfo t;
  t.distance = d.norm();
  if (t.distance == 0.0) return t;
  const double horiz = std::hypot(d.x(), d.y());
  t.bearing_error = horiz > 0.0 ? wrap_angle(std::atan2(d.y(), d.x()) - state.yaw()) : 0.0;
  t.elevation_angle = std::atan2(d.z(), horiz);
  return t;
}

inline constexpr int kObservationSize = 26;
inline constexpr int kActionSize = 3;
/// Distance normalization constant for the target-distance input.
inline constexpr double kDistanceNorm = 12.33;

using Observation = Eigen::Matrix<double, kObservationSize, 1>;
using Action = Eigen::Matrix<double, kActionSize, 1>;

/// [ranges / r_max (20), previous raw action (3), distance / d_norm, bearing / pi, elevation / pi]
inline Observation observe(const RangeScan& s, const Action& prev_raw, const TargetInfo& t) {
  Observation o;
  for (int k = 0; k < kBeamCount; ++k) o[k] = s.ranges[k] / kRangeMax;
  o.segment<3>(kBeamCount) = prev_raw;
  o[23] = t.distance / kDistanceNorm;
  o[24] = t.bearing_error / kPi;
  o[25] = t.elevation_angle / kPi;
  return o;
}

}  // namespace hnav
