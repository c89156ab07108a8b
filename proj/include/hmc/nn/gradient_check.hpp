#pragma once

#include <cstdint>
#include <span>

#include "hmc/nn/network.hpp"

namespace hmc::nn {

/// Compares backward() against central finite differences of the mean
/// clamped cross-entropy, with dropout masks drawn once from `mask_seed` and
/// held fixed. Returns max |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
double gradient_check(const NetworkSpec& spec, const ModelParams& params, const Tensor& input,
                      std::span<const std::size_t> targets, double eps = 1e-5,
                      std::uint64_t mask_seed = 0);

}  // namespace hmc::nn
