#include "hmc/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "hmc/core/error.hpp"

namespace hmc::nn {

double bce_loss(const ClassDistribution& predicted, std::size_t target) {
  if (target >= predicted.size())
    throw ValidationError("target class " + std::to_string(target) + " out of range for " +
                          std::to_string(predicted.size()) + " classes");
  double p = std::clamp(predicted[target], kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -std::log(p);
}

BatchLoss batch_bce(const Tensor& output, std::span<const std::size_t> targets) {
  if (output.rank() != 2 || output.shape()[0] != targets.size())
    throw ValidationError("output " + shape_string(output.shape()) + " does not match " +
                          std::to_string(targets.size()) + " targets");
  const std::size_t n = targets.size();
  const std::size_t k = output.shape()[1];
  BatchLoss out{0.0, Tensor(output.shape())};
  for (std::size_t b = 0; b < n; ++b) {
    if (targets[b] >= k) throw ValidationError("target class out of range");
    double raw = output[b * k + targets[b]];
    double p = std::clamp(raw, kProbabilityClamp, 1.0 - kProbabilityClamp);
    out.value -= std::log(p);
    // d/dp of -ln(clamp(p)) vanishes where the clamp is active.
    if (raw == p) out.gradient[b * k + targets[b]] = -1.0 / (p * static_cast<double>(n));
  }
  out.value /= static_cast<double>(n);
  return out;
}

Penalty l2_penalty(const ModelParams& params, double reg, const LayerFilter& filter) {
  if (reg < 0.0) throw ValidationError("regularization strength must be non-negative");
  Penalty out;
  out.gradient = params;
  for (auto& [index, lp] : out.gradient.layers) {
    lp.bias.fill(0.0);
    const bool active = reg > 0.0 && filter && filter(index);
    const Tensor& w = params.layers.at(index).weight;
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (active) {
        out.value += reg * w[j] * w[j];
        lp.weight[j] = 2.0 * reg * w[j];
      } else {
        lp.weight[j] = 0.0;
      }
    }
  }
  return out;
}

LayerFilter layers_in(std::vector<std::size_t> indices) {
  return [indices = std::move(indices)](std::size_t i) {
    return std::find(indices.begin(), indices.end(), i) != indices.end();
  };
}

}  // namespace hmc::nn
