#include "hmc/nn/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "hmc/nn/loss.hpp"

namespace hmc::nn {

double gradient_check(const NetworkSpec& spec, const ModelParams& params, const Tensor& input,
                      std::span<const std::size_t> targets, double eps, std::uint64_t mask_seed) {
  Rng rng(mask_seed);
  ForwardResult base = forward(spec, params, input, Mode::train, rng);
  const DropoutMasks masks = base.trace.masks;
  BatchLoss loss = batch_bce(base.output, targets);
  ModelParams analytic = backward(spec, params, base.trace, loss.gradient);

  auto loss_at = [&](const ModelParams& p) {
    return batch_bce(forward_with_masks(spec, p, input, masks).output, targets).value;
  };

  double worst = 0.0;
  ModelParams probe = params;
  for (auto& [index, lp] : probe.layers) {
    for (Tensor* t : {&lp.weight, &lp.bias}) {
      const Tensor& grad = t == &lp.weight ? analytic.layers.at(index).weight
                                           : analytic.layers.at(index).bias;
      for (std::size_t j = 0; j < t->size(); ++j) {
        const double saved = (*t)[j];
        (*t)[j] = saved + eps;
        const double up = loss_at(probe);
        (*t)[j] = saved - eps;
        const double down = loss_at(probe);
        (*t)[j] = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double a = grad[j];
        worst = std::max(worst, std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric)));
      }
    }
  }
  return worst;
}

}  // namespace hmc::nn
