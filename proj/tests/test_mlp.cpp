#include <gtest/gtest.h>

#include <cmath>

#include "hnav/mlp.hpp"
#include "oracles.hpp"

using oracle::flatten;

using namespace hnav;


TEST(Mlp, ShapesAndValidation) {
  EXPECT_THROW(Mlp({4}, Head::linear), std::invalid_argument);
  EXPECT_THROW(Mlp({4, 0, 2}, Head::linear), std::invalid_argument);
  Rng rng(1);
  const Mlp net = Mlp::init({26, 32, 32, 3}, Head::tanh, rng);
  EXPECT_EQ(net.parameter_count(), 26u * 32 + 32 + 32 * 32 + 32 + 32 * 3 + 3);
  EXPECT_EQ(net.forward(Matrix::Zero(26, 5)).cols(), 5);
  EXPECT_THROW(net.forward(Matrix::Zero(25, 1)), std::invalid_argument);
}

TEST(Mlp, InitRanges) {
  Rng rng(2);
  const Mlp net = Mlp::init({10, 64, 3}, Head::linear, rng);
  EXPECT_LE(net.layers()[0].weight.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(10.0));
  EXPECT_LE(net.layers()[1].weight.cwiseAbs().maxCoeff(), 3e-3);
  EXPECT_LE(net.layers()[1].bias.cwiseAbs().maxCoeff(), 3e-3);
}

TEST(Mlp, TanhHeadBounded) {
  Rng rng(3);
  const Mlp net = Mlp::init({4, 8, 2}, Head::tanh, rng, 10.0);
  const Matrix y = net.forward(Matrix::Constant(4, 3, 100.0));
  EXPECT_LE(y.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Mlp, GradientMatchesFiniteDifferencesLinear) {
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_LT(oracle::mlp_gradient_error(Head::linear, 1000 + s), 1e-5) << s;
}

TEST(Mlp, GradientMatchesFiniteDifferencesTanh) {
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_LT(oracle::mlp_gradient_error(Head::tanh, 2000 + s), 1e-5) << s;
}

TEST(Mlp, FlatParametersRoundTrip) {
  Rng rng(4);
  Mlp a = Mlp::init({3, 5, 2}, Head::linear, rng);
  Mlp b({3, 5, 2}, Head::linear);
  b.set_flat_parameters(a.flat_parameters());
  EXPECT_TRUE(a == b);
  // Row-major weight order: element (0, 1) of the first layer is second.
  EXPECT_EQ(a.flat_parameters()[1], a.layers()[0].weight(0, 1));
  EXPECT_THROW(b.set_flat_parameters({1.0, 2.0}), std::invalid_argument);
}

TEST(Mlp, SoftUpdate) {
  Rng rng(5);
  const Mlp online = Mlp::init({3, 4, 1}, Head::linear, rng, 1.0);
  Mlp target({3, 4, 1}, Head::linear);
  soft_update(target, online, 0.25);
  const auto po = online.flat_parameters(), pt = target.flat_parameters();
  for (std::size_t i = 0; i < po.size(); ++i) EXPECT_NEAR(pt[i], 0.25 * po[i], 1e-15);
  soft_update(target, online, 1.0);
  EXPECT_TRUE(target == online);
  Mlp other({3, 5, 1}, Head::linear);
  EXPECT_THROW(soft_update(other, online, 0.1), std::invalid_argument);
}

TEST(Mlp, AdamFirstStepIsSignedLearningRate) {
  Rng rng(6);
  Mlp net = Mlp::init({2, 3, 1}, Head::linear, rng, 1.0);
  const auto before = net.flat_parameters();
  ForwardCache c;
  net.forward(Matrix::Constant(2, 1, 0.5), c);
  const MlpGradients g = net.backward(c, Matrix::Constant(1, 1, 1.0));
  AdamConfig cfg;
  cfg.lr = 0.01;
  Adam opt(net, cfg);
  opt.step(net, g);
  const auto after = net.flat_parameters();
  const auto gv = flatten(g);
  for (std::size_t i = 0; i < before.size(); ++i) {
    // Bias-corrected first step: m_hat = g, v_hat = g^2.
    const double expect = gv[i] == 0 ? 0.0 : -cfg.lr * gv[i] / (std::abs(gv[i]) + cfg.eps);
    EXPECT_NEAR(after[i] - before[i], expect, 1e-12);
  }
}

TEST(Mlp, AdamFitsLinearRegression) {
  Rng rng(7);
  Mlp net = Mlp::init({2, 16, 1}, Head::linear, rng);
  Adam opt(net, AdamConfig{});
  Matrix x(2, 64), y(1, 64);
  for (int j = 0; j < 64; ++j) {
    x(0, j) = rng.uniform(-1, 1);
    x(1, j) = rng.uniform(-1, 1);
    y(0, j) = 0.7 * x(0, j) - 0.3 * x(1, j) + 0.1;
  }
  double l = 0;
  for (int it = 0; it < 3000; ++it) {
    ForwardCache c;
    const Matrix e = net.forward(x, c) - y;
    l = e.squaredNorm() / 64;
    opt.step(net, net.backward(c, (2.0 / 64) * e));
  }
  EXPECT_LT(l, 1e-4);
}

TEST(Mlp, ScalarAdamMinimizesQuadratic) {
  ScalarAdam opt(AdamConfig{0.05});
  double p = 3.0;
  for (int i = 0; i < 2000; ++i) p = opt.step(p, 2 * (p - 1.0));
  EXPECT_NEAR(p, 1.0, 1e-3);
}

TEST(Mlp, SoftUpdateZeroTauAndContraction) {
  Rng rng(8);
  const Mlp online = Mlp::init({3, 4, 1}, Head::linear, rng, 1.0);
  Mlp target = Mlp::init({3, 4, 1}, Head::linear, rng, 1.0);
  const Mlp before = target;
  soft_update(target, online, 0.0);
  EXPECT_TRUE(target == before);
  auto dist = [&] {
    const auto a = target.flat_parameters(), b = online.flat_parameters();
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };
  double d = dist();
  for (int i = 0; i < 5; ++i) {
    soft_update(target, online, 0.2);
    const double now = dist();
    EXPECT_NEAR(now, 0.8 * d, 1e-12);
    d = now;
  }
}

TEST(Mlp, ScalarAdamFirstStepAndConvergence) {
  ScalarAdam first(AdamConfig{0.1});
  EXPECT_NEAR(first.step(0.0, 2.5), -0.1, 1e-8);
  ScalarAdam opt(AdamConfig{0.1});
  double w = 0.0;
  for (int i = 0; i < 200; ++i) w = opt.step(w, 2 * (w - 3.0));
  EXPECT_LT(std::abs(w - 3.0), 0.1);
}
