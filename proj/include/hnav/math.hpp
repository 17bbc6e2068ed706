#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>

#include <Eigen/Dense>

namespace hnav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

class MalformedMatrix : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Skew-symmetric matrix such that hat(v) * w == v.cross(w).
inline Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// Inverse of hat(). Throws MalformedMatrix if m is not antisymmetric within tol.
inline Vec3 vee(const Mat3& m, double tol = 1e-9) {
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw MalformedMatrix("vee: matrix is not antisymmetric");
  }
  return {m(2, 1), m(0, 2), m(1, 0)};
}

/// Rodrigues' formula for exp(hat(w)).
inline Mat3 exp_so3(const Vec3& w) {
  const double angle = w.norm();
  const Mat3 k = hat(w);
  if (angle < 1e-12) return Mat3::Identity() + k;
  const double a = std::sin(angle) / angle;
  const double b = (1.0 - std::cos(angle)) / (angle * angle);
  return Mat3::Identity() + a * k + b * k * k;
}

/// Classical Gram-Schmidt on the columns; keeps the first column's direction.
inline Mat3 orthonormalize(const Mat3& r) {
  Vec3 c0 = r.col(0).normalized();
  Vec3 c1 = (r.col(1) - c0.dot(r.col(1)) * c0).normalized();
  Vec3 c2 = c0.cross(c1);
  Mat3 out;
  out.col(0) = c0;
  out.col(1) = c1;
  out.col(2) = c2;
  return out;
}

inline Mat3 rot_z(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

/// Heading of the body x axis projected on the world x-y plane.
inline double yaw_of(const Mat3& r) { return std::atan2(r(1, 0), r(0, 0)); }

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

// ---------------------------------------------------------------------------
// Random numbers

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// FNV-1a, used to turn a stream name into a seed offset.
inline std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Seedable deterministic generator. Equal seeds give equal streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent sub-stream derived from a parent seed and a name.
  static Rng stream(std::uint64_t seed, std::string_view name) {
    return Rng(splitmix64(seed ^ splitmix64(hash_name(name))));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(engine_);
  }

  /// Standard normal via Box-Muller (portable across standard libraries).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck process, Euler-Maruyama discretization:
//   x <- x + theta*(mu - x)*dt + sigma*sqrt(dt)*n,   n ~ N(0, 1)

class OuProcess {
 public:
  OuProcess(double theta, double sigma, double mu, double dt, double initial = 0.0)
      : theta_(theta), sigma_(sigma), mu_(mu), dt_(dt), state_(initial) {
    if (!(theta >= 0.0) || !(sigma >= 0.0) || !(dt > 0.0)) {
      throw std::invalid_argument("OuProcess: require theta >= 0, sigma >= 0, dt > 0");
    }
  }

  double step(Rng& rng) {
    const double n = rng.normal();
    state_ += theta_ * (mu_ - state_) * dt_ + sigma_ * std::sqrt(dt_) * n;
    return state_;
  }

  void reset(double value) { state_ = value; }
  void reset() { state_ = mu_; }

  double state() const { return state_; }
  double theta() const { return theta_; }
  double sigma() const { return sigma_; }
  double mu() const { return mu_; }
  double dt() const { return dt_; }

  /// sigma^2 / (2 theta); infinite for theta == 0.
  double stationary_variance() const {
    return theta_ > 0.0 ? sigma_ * sigma_ / (2.0 * theta_)
                        : std::numeric_limits<double>::infinity();
  }

 private:
  double theta_;
  double sigma_;
  double mu_;
  double dt_;
  double state_;
};

/// Three independent OU channels sharing parameters.
class OuProcess3 {
 public:
  OuProcess3(double theta, double sigma, double dt)
      : ch_{OuProcess(theta, sigma, 0.0, dt), OuProcess(theta, sigma, 0.0, dt),
            OuProcess(theta, sigma, 0.0, dt)} {}

  Vec3 step(Rng& rng) {
    Vec3 out;
    for (int i = 0; i < 3; ++i) out[i] = ch_[i].step(rng);
    return out;
  }
  Vec3 state() const { return {ch_[0].state(), ch_[1].state(), ch_[2].state()}; }
  void reset() {
    for (auto& c : ch_) c.reset();
  }

 private:
  OuProcess ch_[3];
};

}  // namespace hnav
