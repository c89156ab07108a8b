#include <cmath>

#include <gtest/gtest.h>

#include "hmc/core/error.hpp"
#include "hmc/nn/adam.hpp"
#include "hmc/nn/loss.hpp"

using namespace hmc::nn;

TEST(BceLoss, PerfectPredictionIsNearZero) {
  EXPECT_LT(bce_loss(ClassDistribution({1.0, 0.0}), 0), 1e-11);
  EXPECT_GE(bce_loss(ClassDistribution({1.0, 0.0}), 0), 0.0);
}

TEST(BceLoss, UniformPrediction) {
  EXPECT_NEAR(bce_loss(ClassDistribution({0.5, 0.5}), 1), 0.693147180559945, 1e-12);
}

TEST(BceLoss, SymmetricInClassSwap) {
  for (double a : {0.01, 0.2, 0.5, 0.77, 0.999})
    EXPECT_DOUBLE_EQ(bce_loss(ClassDistribution({a, 1 - a}), 0), bce_loss(ClassDistribution({1 - a, a}), 1));
}

TEST(BceLoss, SaturatedPredictionIsClamped) {
  EXPECT_NEAR(bce_loss(ClassDistribution({1.0, 0.0}), 1), -std::log(1e-12), 1e-9);
  EXPECT_THROW(bce_loss(ClassDistribution({0.5, 0.5}), 2), hmc::ValidationError);
}

namespace {

ModelParams single_weight(double w) {
  ModelParams p;
  p.layers.emplace(0, LayerParams{Tensor({1, 1}, {w}), Tensor({1}, {5.0})});
  return p;
}

}  // namespace

TEST(L2Penalty, ZeroStrength) {
  Penalty pen = l2_penalty(single_weight(3.0), 0.0, layers_in({0}));
  EXPECT_EQ(pen.value, 0.0);
  EXPECT_EQ(pen.gradient.layers.at(0).weight[0], 0.0);
}

TEST(L2Penalty, SingleWeightByHand) {
  Penalty pen = l2_penalty(single_weight(3.0), 0.1, layers_in({0}));
  EXPECT_NEAR(pen.value, 0.9, 1e-15);
  EXPECT_NEAR(pen.gradient.layers.at(0).weight[0], 0.6, 1e-15);
  EXPECT_EQ(pen.gradient.layers.at(0).bias[0], 0.0);
}

TEST(L2Penalty, QuadraticInWeightsAndFiltered) {
  ModelParams p;
  p.layers.emplace(0, LayerParams{Tensor({2}, {1.0, -2.0}), Tensor({1})});
  p.layers.emplace(3, LayerParams{Tensor({1}, {10.0}), Tensor({1})});
  ModelParams doubled = p;
  for (auto& [i, lp] : doubled.layers)
    for (double& v : lp.weight.values()) v *= 2;
  double base = l2_penalty(p, 0.5, layers_in({0})).value;
  EXPECT_DOUBLE_EQ(base, 2.5);  // layer 3 filtered out
  EXPECT_DOUBLE_EQ(l2_penalty(doubled, 0.5, layers_in({0})).value, 4 * base);
  EXPECT_DOUBLE_EQ(l2_penalty(p, 0.5, layers_in({0, 3})).value, 52.5);
  EXPECT_THROW(l2_penalty(p, -1.0, layers_in({0})), hmc::ValidationError);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  ModelParams p = single_weight(1.25);
  AdamState s = AdamState::for_params(p);
  ModelParams g = single_weight(0.0);
  g.layers.at(0).bias[0] = 0.0;
  adam_step(s, p, g, 0.01);
  EXPECT_EQ(p, single_weight(1.25));
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  for (double g : {0.5, -3.0, 0.05}) {
    ModelParams p = single_weight(1.0);
    AdamState s = AdamState::for_params(p);
    ModelParams grad = single_weight(g);
    double lr = 1e-3;
    adam_step(s, p, grad, lr);
    double delta = p.layers.at(0).weight[0] - 1.0;
    EXPECT_LT(std::abs(delta - (-lr * (g > 0 ? 1 : -1))) / lr, 1e-6) << g;
  }
}

TEST(Adam, TwoStepsMatchReference) {
  // Reference from an independent arbitrary-precision script:
  // lr=1e-3, g=0.5 constant, w0=1, beta1=0.9, beta2=0.999, eps=1e-8.
  ModelParams p = single_weight(1.0);
  AdamState s = AdamState::for_params(p);
  ModelParams grad = single_weight(0.5);
  adam_step(s, p, grad, 1e-3);
  EXPECT_NEAR(p.layers.at(0).weight[0], 0.99900000001999999958, 1e-12);
  adam_step(s, p, grad, 1e-3);
  EXPECT_NEAR(p.layers.at(0).weight[0], 0.99800000003999999916, 1e-12);
  EXPECT_EQ(s.step, 2u);
}
