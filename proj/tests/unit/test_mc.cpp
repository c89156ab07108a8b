#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "hmc/core/error.hpp"
#include "hmc/mc/mc.hpp"
#include "hmc/nn/network.hpp"

using namespace hmc;
using namespace hmc::nn;
using hmc::mc::MCConfig;

namespace {

NetworkSpec toy_net(double rate) {
  return NetworkSpec({2}, {LayerSpec::dense(3), LayerSpec::relu(), LayerSpec::dropout(rate), LayerSpec::dense(2),
                           LayerSpec::softmax()});
}

ModelParams toy_params() {
  ModelParams p;
  p.layers[0] = {Tensor({2, 3}, {0.8, -0.5, 1.2, 0.3, 0.9, -0.4}), Tensor({3}, {0.1, 0.2, 0.05})};
  p.layers[3] = {Tensor({3, 2}, {1.5, -1.0, -0.7, 1.1, 0.9, -1.3}), Tensor({2}, {0.0, 0.1})};
  return p;
}

const Tensor kInput({2}, {0.7, 1.1});

}  // namespace

TEST(Entropy, ReferenceValues) {
  EXPECT_EQ(mc::predictive_entropy(ClassDistribution({1.0, 0.0})), 0.0);
  EXPECT_NEAR(mc::predictive_entropy(ClassDistribution({0.5, 0.5})), 0.693147180559945, 1e-12);
  EXPECT_NEAR(mc::predictive_entropy(ClassDistribution({0.5, 0.5})), 0.6930, 5e-4);
  EXPECT_NEAR(mc::predictive_entropy(ClassDistribution({0.9, 0.1})), 0.325082973391448, 1e-12);
}

TEST(Entropy, BoundsAndPermutationInvariance) {
  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> w(3);
    for (double& v : w) v = uniform01(rng);
    auto d = ClassDistribution::normalized(w);
    const double h = mc::predictive_entropy(d);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(3.0) + 1e-9);
    std::swap(w[0], w[2]);
    EXPECT_NEAR(mc::predictive_entropy(ClassDistribution::normalized(w)), h, 1e-14);
  }
  EXPECT_NEAR(mc::predictive_entropy(ClassDistribution({1 / 3.0, 1 / 3.0, 1 / 3.0})), std::log(3.0), 1e-12);
}

TEST(McForward, NoDropoutMatchesDeterministicExactly) {
  NetworkSpec spec = toy_net(0.0);
  ModelParams p = toy_params();
  ClassDistribution det = mc::deterministic_predict(spec, p, kInput);
  for (std::size_t T : {1u, 2u, 7u, 50u}) {
    auto r = mc::mc_forward(spec, p, kInput, {T, 9, false});
    EXPECT_EQ(r.mean, det) << "T=" << T;
    EXPECT_EQ(r.passes, T);
  }
}

TEST(McForward, SinglePassEqualsThatPass) {
  NetworkSpec spec = toy_net(0.5);
  ModelParams p = toy_params();
  auto r = mc::mc_forward(spec, p, kInput, {1, 21, true});
  EXPECT_EQ(r.mean, mc::stochastic_pass(spec, p, kInput, 21, 0));
  ASSERT_EQ(r.per_pass.size(), 1u);
  EXPECT_NEAR(r.entropy, mc::predictive_entropy(r.mean), 0.0);
}

TEST(McForward, DeterministicIsPureAndZeroWeightsGiveUniform) {
  NetworkSpec spec = toy_net(0.5);
  ModelParams p = toy_params();
  EXPECT_EQ(mc::deterministic_predict(spec, p, kInput), mc::deterministic_predict(spec, p, kInput));
  ModelParams zero = zeros_like(spec);
  auto d = mc::deterministic_predict(spec, zero, kInput);
  EXPECT_EQ(d[0], 0.5);
  EXPECT_EQ(d[1], 0.5);
}

TEST(McForward, RejectsZeroPassesAndBatchedInput) {
  NetworkSpec spec = toy_net(0.5);
  ModelParams p = toy_params();
  EXPECT_THROW(mc::mc_forward(spec, p, kInput, {0, 1, false}), ValidationError);
  EXPECT_THROW(mc::mc_forward(spec, p, Tensor({1, 2}, {0.1, 0.2}), {3, 1, false}), ValidationError);
}

TEST(McForward, MatchesExhaustiveMaskExpectation) {
  NetworkSpec spec = toy_net(0.5);
  ModelParams p = toy_params();
  // Enumerate all 2^3 masks on the hidden units; each has probability 1/8.
  double exact = 0.0, second = 0.0;
  for (unsigned bits = 0; bits < 8; ++bits) {
    DropoutMasks masks(spec.size());
    masks[2] = Tensor({1, 3});
    for (unsigned u = 0; u < 3; ++u) (*masks[2])[u] = (bits >> u) & 1u ? 2.0 : 0.0;
    const double p0 = forward_with_masks(spec, p, Tensor({1, 2}, {0.7, 1.1}), masks).output[0];
    exact += p0 / 8.0;
    second += p0 * p0 / 8.0;
  }
  const std::size_t T = 100000;
  auto r = mc::mc_forward(spec, p, kInput, {T, 2024, false});
  const double stderr_ = std::sqrt((second - exact * exact) / static_cast<double>(T));
  EXPECT_GT(stderr_, 0.0);
  EXPECT_LE(std::abs(r.mean[0] - exact), 3.0 * stderr_) << "exact " << exact << " mc " << r.mean[0];
}

TEST(McForward, EstimatorVarianceFallsAsOneOverT) {
  NetworkSpec spec = toy_net(0.5);
  ModelParams p = toy_params();
  const std::vector<std::size_t> Ts{10, 40, 160, 640};
  const std::size_t reps = 200;
  std::vector<double> lx, ly;
  for (std::size_t T : Ts) {
    std::vector<double> est;
    for (std::size_t k = 0; k < reps; ++k) est.push_back(mc::mc_forward(spec, p, kInput, {T, 1000 + k, false}).mean[0]);
    const double m = std::accumulate(est.begin(), est.end(), 0.0) / reps;
    double v = 0.0;
    for (double e : est) v += (e - m) * (e - m);
    v /= reps - 1;
    lx.push_back(std::log(static_cast<double>(T)));
    ly.push_back(std::log(v));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / 4, my = std::accumulate(ly.begin(), ly.end(), 0.0) / 4;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, -1.0, 0.2);
}

TEST(McForward, JsonShape) {
  NetworkSpec spec = toy_net(0.5);
  auto r = mc::mc_forward(spec, toy_params(), kInput, {5, 1, false});
  auto j = mc::to_json(r, {"TN", "rest"});
  EXPECT_EQ(j["T"], 5);
  EXPECT_EQ(j["probs"].size(), 2u);
  EXPECT_EQ(j["classes"][0], "TN");
  EXPECT_DOUBLE_EQ(j["entropy"].get<double>(), r.entropy);
}
