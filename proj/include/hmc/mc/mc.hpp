#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hmc/nn/distribution.hpp"
#include "hmc/nn/network_spec.hpp"
#include "hmc/nn/params.hpp"
#include "hmc/nn/tensor.hpp"

namespace hmc::mc {

struct MCConfig {
  std::size_t passes = 50;  // T
  std::uint64_t seed = 0;
  bool keep_passes = false;  // retain per-pass distributions for diagnostics

  void validate() const;
};

struct UncertaintyReport {
  nn::ClassDistribution mean;
  double entropy = 0.0;  // nats
  std::size_t passes = 0;
  std::vector<nn::ClassDistribution> per_pass;
};

/// Shannon entropy in nats, with 0 ln 0 = 0.
double predictive_entropy(const nn::ClassDistribution& dist);

/// Single eval-mode pass for one unbatched input.
nn::ClassDistribution deterministic_predict(const nn::NetworkSpec& spec, const nn::ModelParams& params,
                                            const nn::Tensor& input);

/// Pass t of an MC run: dropout masks come from derive_seed(seed, "pass", t).
nn::ClassDistribution stochastic_pass(const nn::NetworkSpec& spec, const nn::ModelParams& params,
                                      const nn::Tensor& input, std::uint64_t seed, std::size_t t);

/// Averages T stochastic passes in pass order and reports the entropy of the mean.
UncertaintyReport mc_forward(const nn::NetworkSpec& spec, const nn::ModelParams& params,
                             const nn::Tensor& input, const MCConfig& config);

/// {"probs": [...], "entropy": h, "T": n, "classes": [...]}
nlohmann::json to_json(const UncertaintyReport& report, const std::vector<std::string>& classes);

}  // namespace hmc::mc
