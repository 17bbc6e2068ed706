#include <gtest/gtest.h>

#include <cmath>

#include "hnav/math.hpp"

using namespace hnav;

TEST(Math, HatVeeRoundTrip) {
  const Vec3 v(1, 2, 3);
  EXPECT_EQ(vee(hat(v)), v);
  const Vec3 w(-0.3, 0.7, 2.0);
  EXPECT_NEAR((hat(v) * w - v.cross(w)).norm(), 0.0, 1e-14);
}

TEST(Math, HatIsAntisymmetric) {
  const Mat3 m = hat(Vec3(4, -5, 6));
  EXPECT_EQ(m + m.transpose(), Mat3::Zero());
}

TEST(Math, VeeRejectsNonAntisymmetric) {
  Mat3 m = hat(Vec3(1, 2, 3));
  m(0, 0) = 0.1;
  EXPECT_THROW(vee(m), MalformedMatrix);
}

TEST(Math, ExpSo3MatchesAngleAxis) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 w(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    const Mat3 ref = Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix();
    EXPECT_LT((exp_so3(w) - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_EQ(exp_so3(Vec3::Zero()), Mat3::Identity());
}

TEST(Math, OrthonormalizeRestoresRotation) {
  Mat3 r = rot_z(0.4) * exp_so3(Vec3(0.1, -0.2, 0.3));
  r(0, 1) += 1e-4;
  r(2, 2) -= 2e-4;
  const Mat3 q = orthonormalize(r);
  EXPECT_LT((q.transpose() * q - Mat3::Identity()).norm(), 1e-14);
  EXPECT_NEAR(q.determinant(), 1.0, 1e-14);
  EXPECT_LT((q - r).norm(), 1e-3);
}

TEST(Math, WrapAngleRange) {
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(0.5 + 4 * kPi), 0.5, 1e-12);
  for (double a = -20; a < 20; a += 0.37) {
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::cos(w), std::cos(a), 1e-12);
    EXPECT_NEAR(std::sin(w), std::sin(a), 1e-12);
  }
}

TEST(Math, YawOfRotZ) {
  for (double y = -3.0; y < 3.1; y += 0.25) EXPECT_NEAR(yaw_of(rot_z(y)), y, 1e-12);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    (void)c;
  }
  EXPECT_NE(Rng(42).next_u64(), Rng(43).next_u64());
  EXPECT_NE(Rng::stream(1, "target").next_u64(), Rng::stream(1, "physics").next_u64());
  EXPECT_EQ(Rng::stream(7, "x").next_u64(), Rng::stream(7, "x").next_u64());
}

TEST(Rng, NormalMoments) {
  Rng rng(11);
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    ss += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(ss / n, 1.0, 0.015);
}

TEST(Ou, ParameterValidation) {
  EXPECT_THROW(OuProcess(-1, 0.2, 0, 1), std::invalid_argument);
  EXPECT_THROW(OuProcess(0.1, -0.2, 0, 1), std::invalid_argument);
  EXPECT_THROW(OuProcess(0.1, 0.2, 0, 0), std::invalid_argument);
}

TEST(Ou, ZeroSigmaDecaysGeometrically) {
  OuProcess p(0.15, 0.0, 0.0, 1.0, 1.0);
  Rng rng(0);
  for (int k = 1; k <= 10; ++k) EXPECT_NEAR(p.step(rng), std::pow(0.85, k), 1e-15);
}

TEST(Ou, ResetReturnsToMean) {
  OuProcess p(0.5, 0.3, 0.2, 0.01);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) p.step(rng);
  p.reset();
  EXPECT_EQ(p.state(), 0.2);
}

// The Euler-Maruyama recursion is AR(1) with coefficient (1 - theta dt); its
// exact stationary variance is sigma^2 dt / (1 - (1 - theta dt)^2).
TEST(Ou, StationaryVarianceMatchesContinuousLimit) {
  const double theta = 0.5, sigma = 0.3, dt = 0.01;
  OuProcess p(theta, sigma, 0.0, dt);
  Rng rng(2024);
  for (int i = 0; i < 10000; ++i) p.step(rng);
  const int n = 1000000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double x = p.step(rng);
    s += x;
    ss += x * x;
  }
  const double mean = s / n;
  const double var = ss / n - mean * mean;
  const double target = sigma * sigma / (2 * theta);
  EXPECT_NEAR(var, target, 0.1 * target);
  const double ar1 = 1.0 - theta * dt;
  EXPECT_NEAR(target, sigma * sigma * dt / (1 - ar1 * ar1), 0.005 * target);
  EXPECT_EQ(p.stationary_variance(), target);
}

TEST(Ou, ThreeChannelsIndependentState) {
  OuProcess3 p(0.15, 0.2, 1.0);
  Rng rng(5);
  const Vec3 a = p.step(rng);
  EXPECT_NE(a.x(), a.y());
  p.reset();
  EXPECT_EQ(p.state(), Vec3::Zero());
}
