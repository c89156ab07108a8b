#pragma once

#include <optional>
#include <vector>

#include "hmc/core/rng.hpp"
#include "hmc/nn/network_spec.hpp"
#include "hmc/nn/params.hpp"
#include "hmc/nn/tensor.hpp"

namespace hmc::nn {

/// train and mc both sample dropout masks; eval makes dropout the identity.
enum class Mode { train, eval, mc };

/// Dropout masks per layer, already scaled: each entry is 0 or 1/(1-p).
using DropoutMasks = std::vector<std::optional<Tensor>>;

struct ForwardTrace {
  Mode mode = Mode::eval;
  std::vector<Tensor> inputs;  // batched input of every layer
  Tensor output;               // batched softmax output, shape (batch, classes)
  DropoutMasks masks;          // one slot per layer, set only for active dropout
};

struct ForwardResult {
  Tensor output;
  ForwardTrace trace;
};

/// Runs the layer stack on `input`, shaped like spec.input_shape() with an
/// optional leading batch extent. The output is always (batch, classes).
ForwardResult forward(const NetworkSpec& spec, const ModelParams& params, const Tensor& input,
                      Mode mode, Rng& rng);

/// Deterministic eval-mode pass.
Tensor forward_eval(const NetworkSpec& spec, const ModelParams& params, const Tensor& input);

/// Replays fixed dropout masks (e.g. taken from an earlier trace).
ForwardResult forward_with_masks(const NetworkSpec& spec, const ModelParams& params,
                                 const Tensor& input, const DropoutMasks& masks);

/// Where the upstream gradient enters: at the softmax output, or directly at
/// its input (the logits), which skips the softmax Jacobian.
enum class GradientSeed { probabilities, logits };

/// Reverse-mode gradients of every parameter, laid out like ModelParams.
ModelParams backward(const NetworkSpec& spec, const ModelParams& params, const ForwardTrace& trace,
                     const Tensor& upstream, GradientSeed seed = GradientSeed::probabilities);

}  // namespace hmc::nn
