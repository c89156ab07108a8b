#pragma once

#include <cstdint>
#include <filesystem>
#include <map>

#include "hmc/nn/network_spec.hpp"
#include "hmc/nn/tensor.hpp"

namespace hmc::nn {

struct LayerParams {
  Tensor weight;
  Tensor bias;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Weights and biases keyed by layer index; only dense and conv2d layers
/// carry entries. Gradients share this layout.
struct ModelParams {
  std::map<std::size_t, LayerParams> layers;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// He-normal weights (std sqrt(2 / fan_in)) when the next layer is a relu,
/// Glorot-uniform otherwise; zero biases.
ModelParams init_params(const NetworkSpec& spec, std::uint64_t seed);

/// Same layout as `spec`'s parameters, every value zero.
ModelParams zeros_like(const NetworkSpec& spec);

/// Throws ValidationError when `params` does not match the shapes implied by `spec`.
void check_params(const NetworkSpec& spec, const ModelParams& params);

// Binary layout: "HMC1", then for each parametric layer in index order the
// weight and then the bias tensor, each as u32 rank, u32 extents, f64 values
// (all little-endian).
std::vector<std::uint8_t> encode_params(const ModelParams& params);
ModelParams decode_params(const NetworkSpec& spec, std::span<const std::uint8_t> bytes);

void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const NetworkSpec& spec, const std::filesystem::path& path);

}  // namespace hmc::nn
