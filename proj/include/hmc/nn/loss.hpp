#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "hmc/nn/distribution.hpp"
#include "hmc/nn/params.hpp"

namespace hmc::nn {

inline constexpr double kProbabilityClamp = 1e-12;

/// -ln p(target) with p clamped to [1e-12, 1 - 1e-12].
double bce_loss(const ClassDistribution& predicted, std::size_t target);

/// Mean clamped cross-entropy over the rows of a (batch, classes) output,
/// together with its gradient with respect to that output.
struct BatchLoss {
  double value = 0.0;
  Tensor gradient;
};
BatchLoss batch_bce(const Tensor& output, std::span<const std::size_t> targets);

using LayerFilter = std::function<bool(std::size_t layer_index)>;

struct Penalty {
  double value = 0.0;
  ModelParams gradient;  // 2 * reg * w on filtered weights, zero elsewhere and on biases
};

/// reg * sum of squared weights over the layers accepted by `filter`.
Penalty l2_penalty(const ModelParams& params, double reg, const LayerFilter& filter);

/// Accepts the layers listed in `indices`.
LayerFilter layers_in(std::vector<std::size_t> indices);

}  // namespace hmc::nn
