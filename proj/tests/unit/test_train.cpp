#include <random>

#include <gtest/gtest.h>

#include "hmc/core/error.hpp"
#include "hmc/nn/train.hpp"

using namespace hmc::nn;

namespace {

TrainingSet blobs(std::size_t n, std::uint64_t seed) {
  hmc::Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  TrainingSet s;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t label = i % 2;
    double c = label == 0 ? -2.0 : 2.0;
    s.inputs.push_back(Tensor({2}, {c + noise(rng), c + noise(rng)}));
    s.labels.push_back(label);
  }
  return s;
}

NetworkSpec small_net() {
  return NetworkSpec({2}, {LayerSpec::dense(16), LayerSpec::relu(), LayerSpec::dropout(0.5),
                           LayerSpec::dense(16), LayerSpec::relu(), LayerSpec::dropout(0.5),
                           LayerSpec::dense(2), LayerSpec::softmax()});
}

}  // namespace

TEST(Train, SeparableBlobsReachHighAccuracy) {
  NetworkSpec spec = small_net();
  TrainingSet data = blobs(200, 1);
  TrainConfig cfg;
  cfg.lr = 1e-3;  // 350 steps at the 1e-4 default are too few for a cold start
  cfg.epochs = 50;
  cfg.seed = 3;
  TrainResult r = train(spec, init_params(spec, 3), data, cfg);
  ASSERT_EQ(r.loss_history.size(), 50u);
  EXPECT_GE(training_accuracy(spec, r.params, data), 0.95);
}

TEST(Train, SmoothedLossNonIncreasing) {
  // Dropout disabled: its sampling noise in the epoch loss is not part of this property.
  NetworkSpec spec({2}, {LayerSpec::dense(16), LayerSpec::relu(), LayerSpec::dense(16), LayerSpec::relu(),
                         LayerSpec::dense(2), LayerSpec::softmax()});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainingSet data = blobs(200, 100 + seed);
    TrainConfig cfg;
    cfg.lr = 1e-3;
    cfg.epochs = 50;
    cfg.seed = seed;
    TrainResult r = train(spec, init_params(spec, seed), data, cfg);
    double prev = 1e300;
    for (std::size_t w = 0; w + 5 <= r.loss_history.size(); w += 5) {
      double mean = 0.0;
      for (std::size_t k = w; k < w + 5; ++k) mean += r.loss_history[k] / 5.0;
      EXPECT_LE(mean, prev) << "seed " << seed << ", window starting at epoch " << w;
      prev = mean;
    }
  }
}

TEST(Train, ZeroLearningRateKeepsParams) {
  NetworkSpec spec = small_net();
  ModelParams init = init_params(spec, 1);
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.epochs = 4;
  cfg.reg = 0.0;
  cfg.l2_scope = L2Scope::all;
  // Without dropout the per-epoch loss is exactly flat.
  NetworkSpec no_drop({2}, {LayerSpec::dense(8), LayerSpec::relu(), LayerSpec::dense(2), LayerSpec::softmax()});
  ModelParams init2 = init_params(no_drop, 1);
  TrainResult r = train(no_drop, init2, blobs(64, 4), cfg);
  EXPECT_EQ(r.params, init2);
  for (double l : r.loss_history) EXPECT_NEAR(l, r.loss_history.front(), 1e-12);
  EXPECT_EQ(train(spec, init, blobs(64, 4), cfg).params, init);
}

TEST(Train, SameSeedSameHistory) {
  NetworkSpec spec = small_net();
  TrainingSet data = blobs(100, 7);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 42;
  auto aug = [](const Tensor& x, hmc::Rng& rng) {
    Tensor y = x;
    y[0] += hmc::uniform01(rng) * 0.01;
    return y;
  };
  TrainResult a = train(spec, init_params(spec, 1), data, cfg, aug);
  TrainResult b = train(spec, init_params(spec, 1), data, cfg, aug);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.params, b.params);
  cfg.seed = 43;
  EXPECT_NE(train(spec, init_params(spec, 1), data, cfg, aug).loss_history, a.loss_history);
}

TEST(Train, RejectsDegenerateData) {
  NetworkSpec spec = small_net();
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(train(spec, init_params(spec, 1), TrainingSet{}, cfg), hmc::ValidationError);
  TrainingSet one = blobs(10, 1);
  for (auto& l : one.labels) l = 1;
  EXPECT_THROW(train(spec, init_params(spec, 1), one, cfg), hmc::ValidationError);
}
