#pragma once

#include <cstdint>

#include "hmc/nn/params.hpp"

namespace hmc::nn {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamHyper hyper;
  ModelParams first_moment;
  ModelParams second_moment;
  std::uint64_t step = 0;

  /// Zero moments shaped like `params`.
  static AdamState for_params(const ModelParams& params, AdamHyper hyper = {});
};

/// One bias-corrected Adam update of `params` in place; increments state.step.
void adam_step(AdamState& state, ModelParams& params, const ModelParams& grads, double lr);

}  // namespace hmc::nn
