#include "hmc/nn/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hmc/core/error.hpp"

namespace hmc::nn {

ClassDistribution::ClassDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw ValidationError("class distribution needs at least one class");
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw ValidationError("class probability out of [0, 1]: " + std::to_string(p));
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("class probabilities sum to " + std::to_string(sum));
}

ClassDistribution ClassDistribution::normalized(std::vector<double> weights) {
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw NumericError("cannot normalize weights with sum " + std::to_string(sum));
  for (double& w : weights) {
    if (w < 0.0) throw NumericError("negative class weight");
    w /= sum;
  }
  return ClassDistribution(std::move(weights));
}

std::size_t ClassDistribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

ClassDistribution softmax(std::span<const double> logits) {
  if (logits.size() < 2) throw ValidationError("softmax needs at least two logits");
  for (double z : logits)
    if (!std::isfinite(z)) throw NumericError("non-finite logit passed to softmax");
  double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> e(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(logits[i] - top);
    sum += e[i];
  }
  for (double& v : e) v /= sum;
  return ClassDistribution(std::move(e));
}

}  // namespace hmc::nn
