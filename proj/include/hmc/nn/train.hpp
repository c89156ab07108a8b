#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hmc/core/rng.hpp"
#include "hmc/nn/adam.hpp"
#include "hmc/nn/network.hpp"

namespace hmc::nn {

enum class L2Scope { classifier, all };

struct TrainConfig {
  double lr = 1e-4;
  std::size_t batch_size = 32;
  std::size_t epochs = 55;
  double reg = 1e-6;
  L2Scope l2_scope = L2Scope::classifier;
  std::uint64_t seed = 0;
  AdamHyper adam{};
};

/// Inputs and integer class labels, index-aligned.
struct TrainingSet {
  std::vector<Tensor> inputs;
  std::vector<std::size_t> labels;
};

/// Per-sample transform applied freshly every epoch (augmentation).
using SampleTransform = std::function<Tensor(const Tensor&, Rng&)>;

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // per-epoch mean of cross-entropy + L2 penalty
};

/// Mini-batch Adam on mean cross-entropy plus the L2 penalty. Shuffling,
/// dropout and augmentation draw from independent streams derived from
/// config.seed, so a fixed seed reproduces the run exactly.
TrainResult train(const NetworkSpec& spec, ModelParams params, const TrainingSet& data,
                  const TrainConfig& config, const SampleTransform& transform = {});

/// Fraction of samples whose eval-mode argmax equals the label.
double training_accuracy(const NetworkSpec& spec, const ModelParams& params, const TrainingSet& data);

}  // namespace hmc::nn
