#include <gtest/gtest.h>

#include <cmath>

#include "ionforge/chain.hpp"
#include "ionforge/network.hpp"
#include "ionforge/train.hpp"

namespace ionforge {
namespace {

Eigen::MatrixXd random_targets(const RamanSetup& s, int count, std::uint64_t seed) {
  return generate_dataset(s, count, seed).targets;
}

TEST(Random, DerivedSeedsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(2, 2, 3));
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Random, Uniform01Range) {
  Engine g(42);
  for (int k = 0; k < 10000; ++k) {
    const double u = uniform01(g);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Network, HandExample) {
  NetworkParams p = NetworkParams::zeros(2, 1);
  p.w1(0, 0) = 2.0;
  p.b1[0] = -1.0;
  p.w2 << 3.0, 0.0, 0.0, 0.0;
  const auto c = forward_pass(p, Eigen::VectorXd::Ones(1));
  EXPECT_DOUBLE_EQ(c.omega(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(c.omega(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(c.omega(1, 0), 0.0);
  // ReLU clips a negative pre-activation.
  EXPECT_DOUBLE_EQ(forward_pass(p, Eigen::VectorXd::Constant(1, 0.25)).omega(0, 0), 0.0);
}

TEST(Network, OutputIsRowMajorOmega) {
  NetworkParams p = NetworkParams::zeros(3, 2);
  p.b2 << 0, 1, 2, 3, 4, 5, 6, 7, 8;
  const auto c = forward_pass(p, Eigen::VectorXd::Zero(3));
  EXPECT_EQ(c.omega(0, 2), 2.0);
  EXPECT_EQ(c.omega(2, 0), 6.0);
  EXPECT_EQ(c.omega(1, 1), 4.0);
}

TEST(Network, ShapesAndValidation) {
  const auto p = init_params(5, 32, 1);
  EXPECT_EQ(p.input_dim(), 10);
  EXPECT_EQ(p.output_dim(), 25);
  EXPECT_EQ(p.hidden_dim(), 32);
  EXPECT_EQ(p.n_ions(), 5);
  EXPECT_NO_THROW(p.validate());
  EXPECT_THROW(forward_pass(p, Eigen::VectorXd::Zero(6)), ShapeError);
  NetworkParams bad = p;
  bad.b1.resize(3);
  EXPECT_THROW(bad.validate(), ShapeError);
}

TEST(Network, InitDeterministicAndBounded) {
  const auto a = init_params(6, 64, 9);
  const auto b = init_params(6, 64, 9);
  const auto c = init_params(6, 64, 10);
  EXPECT_EQ(a.w1, b.w1);
  EXPECT_EQ(a.w2, b.w2);
  EXPECT_NE(a.w1, c.w1);
  EXPECT_LE(a.w1.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 15.0));
  EXPECT_LE(a.w2.cwiseAbs().maxCoeff(), 0.1 * std::sqrt(3.0 * 15.0 / 64.0));
  EXPECT_TRUE((a.b1.array() == 0.0).all());
  EXPECT_TRUE((a.b2.array() == 0.0).all());
}

TEST(Network, DropoutMaskKeepRate) {
  const auto m = dropout_mask(1000, 20, 0.25, 3);
  EXPECT_TRUE(((m.array() == 0.0) || (m.array() == 1.0)).all());
  EXPECT_NEAR(m.mean(), 0.75, 0.02);
  EXPECT_EQ(dropout_mask(10, 2, 0.0, 3).sum(), 20.0);
}

TEST(Loss, ZeroForPerfectReconstruction) {
  const RamanSetup s(build_chain(tune_trap(3)));
  NetworkParams p = NetworkParams::zeros(3, 4);
  p.b2 << 0.2, -0.5, 0.9, 0.4, 0.1, -0.3, 0.7, 0.6, -0.2;
  const auto c = forward_pass(p, Eigen::VectorXd::Zero(3));
  const Eigen::VectorXd target = normalize(coupling_matrix(c, s)).graph.couplings;
  const auto r = loss_and_gradient(p, target, s);
  EXPECT_NEAR(r.cost, 0.0, 1e-28);
  EXPECT_LT(r.grads.b2.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Loss, MatchesCentralDifferences) {
  const RamanSetup s(build_chain(tune_trap(4)));
  const int hidden = 8;
  const NetworkParams p = init_params(4, hidden, 3);
  const Eigen::MatrixXd x = random_targets(s, 5, 17);
  const Eigen::MatrixXd mask = dropout_mask(hidden, 5, 0.25, 99);
  const double rate = 0.25;
  const LossResult r = loss_and_gradient(p, x, s, &mask, rate);

  NetworkParams probe = p;
  NetworkParams grads = r.grads;
  double worst = 0.0;
  const double h = 1e-6;
  probe.zip(
      [&](auto& theta, auto& g) {
        for (Eigen::Index k = 0; k < theta.size(); ++k) {
          const double saved = theta.data()[k];
          theta.data()[k] = saved + h;
          const double up = loss_and_gradient(probe, x, s, &mask, rate).cost;
          theta.data()[k] = saved - h;
          const double dn = loss_and_gradient(probe, x, s, &mask, rate).cost;
          theta.data()[k] = saved;
          const double fd = (up - dn) / (2 * h);
          const double an = g.data()[k];
          const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
          worst = std::max(worst, std::abs(fd - an) / denom);
        }
      },
      grads);
  EXPECT_LT(worst, 1e-4);
}

TEST(Loss, BatchMeanOfSingles) {
  const RamanSetup s(build_chain(tune_trap(5)));
  const NetworkParams p = init_params(5, 16, 4);
  const Eigen::MatrixXd x = random_targets(s, 4, 8);
  const auto all = loss_and_gradient(p, x, s);
  double cost = 0.0;
  Eigen::MatrixXd gw1 = Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols());
  for (int b = 0; b < 4; ++b) {
    const auto one = loss_and_gradient(p, x.col(b), s);
    cost += one.cost / 4;
    gw1 += one.grads.w1 / 4;
  }
  EXPECT_NEAR(all.cost, cost, 1e-14);
  EXPECT_LT((all.grads.w1 - gw1).cwiseAbs().maxCoeff(), 1e-12 * gw1.cwiseAbs().maxCoeff());
}

TEST(Loss, ZeroOutputFlaggedNotNan) {
  const RamanSetup s(build_chain(tune_trap(3)));
  const NetworkParams p = NetworkParams::zeros(3, 4);
  const auto r = loss_and_gradient(p, random_targets(s, 2, 1), s);
  EXPECT_EQ(r.degenerate, 2);
  EXPECT_TRUE(std::isfinite(r.cost));
  EXPECT_TRUE(r.grads.all_finite());
}

TEST(Loss, RejectsShapeMismatch) {
  const RamanSetup s(build_chain(tune_trap(4)));
  const NetworkParams p = init_params(3, 4, 1);
  EXPECT_THROW(loss_and_gradient(p, Eigen::MatrixXd::Zero(6, 1), s), ShapeError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  NetworkParams p = NetworkParams::zeros(2, 1);
  p.w1(0, 0) = 1.0;
  NetworkParams g = p.zeros_like();
  g.w1(0, 0) = 0.37;
  AdamState st = AdamState::like(p);
  adam_step(p, g, st, 1e-3);
  EXPECT_NEAR(p.w1(0, 0), 1.0 - 1e-3, 1e-10);
  EXPECT_EQ(st.t, 1);
}

TEST(Adam, ZeroGradientLeavesParams) {
  NetworkParams p = init_params(3, 4, 1);
  const NetworkParams before = p;
  AdamState st = AdamState::like(p);
  adam_step(p, p.zeros_like(), st, 1e-3);
  EXPECT_EQ(p.w1, before.w1);
  EXPECT_EQ(p.w2, before.w2);
}

TEST(Adam, MinimizesQuadratic) {
  NetworkParams p = NetworkParams::zeros(2, 1);
  p.b2 << 3.0, -2.0, 1.0, 0.5;
  AdamState st = AdamState::like(p);
  for (int k = 0; k < 3000; ++k) {
    NetworkParams g = p.zeros_like();
    g.b2 = 2.0 * p.b2;
    adam_step(p, g, st, 1e-2);
  }
  EXPECT_LT(p.b2.cwiseAbs().maxCoeff(), 1e-2);
}

}  // namespace
}  // namespace ionforge
