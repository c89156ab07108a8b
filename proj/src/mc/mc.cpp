#include "hmc/mc/mc.hpp"

#include <cmath>

#include "hmc/core/error.hpp"
#include "hmc/core/rng.hpp"
#include "hmc/nn/network.hpp"

namespace hmc::mc {
namespace {

nn::ClassDistribution single_row(const nn::Tensor& output) {
  return nn::ClassDistribution::normalized({output.values().begin(), output.values().end()});
}

void require_unbatched(const nn::NetworkSpec& spec, const nn::Tensor& input) {
  if (input.shape() != spec.input_shape())
    throw ValidationError("expected a single input of shape " + nn::shape_string(spec.input_shape()) + ", got " +
                          nn::shape_string(input.shape()));
}

}  // namespace

void MCConfig::validate() const {
  if (passes < 1) throw ValidationError("MC dropout needs T >= 1 forward passes");
}

double predictive_entropy(const nn::ClassDistribution& dist) {
  double h = 0.0;
  for (double p : dist.probs())
    if (p > 0.0) h -= p * std::log(p);
  return std::max(0.0, h);
}

nn::ClassDistribution deterministic_predict(const nn::NetworkSpec& spec, const nn::ModelParams& params,
                                            const nn::Tensor& input) {
  require_unbatched(spec, input);
  return single_row(nn::forward_eval(spec, params, input));
}

nn::ClassDistribution stochastic_pass(const nn::NetworkSpec& spec, const nn::ModelParams& params,
                                      const nn::Tensor& input, std::uint64_t seed, std::size_t t) {
  require_unbatched(spec, input);
  Rng rng(derive_seed(seed, "pass", t));
  return single_row(nn::forward(spec, params, input, nn::Mode::mc, rng).output);
}

UncertaintyReport mc_forward(const nn::NetworkSpec& spec, const nn::ModelParams& params,
                             const nn::Tensor& input, const MCConfig& config) {
  config.validate();
  UncertaintyReport report;
  report.passes = config.passes;
  std::vector<double> mean;
  for (std::size_t t = 0; t < config.passes; ++t) {
    nn::ClassDistribution pass = stochastic_pass(spec, params, input, config.seed, t);
    if (mean.empty()) mean.assign(pass.size(), 0.0);
    // Running mean: identical passes leave it bit-identical to any one of them.
    const double count = static_cast<double>(t + 1);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += (pass[c] - mean[c]) / count;
    if (config.keep_passes) report.per_pass.push_back(std::move(pass));
  }
  double total = 0.0;
  for (double v : mean) total += v;
  if (std::abs(total - 1.0) >= 1e-9)
    throw NumericError("MC mean drifted from a distribution (sum " + std::to_string(total) + ")");
  report.mean = nn::ClassDistribution::normalized(std::move(mean));
  report.entropy = predictive_entropy(report.mean);
  return report;
}

nlohmann::json to_json(const UncertaintyReport& report, const std::vector<std::string>& classes) {
  if (!classes.empty() && classes.size() != report.mean.size())
    throw ValidationError("class name count does not match the distribution");
  return {{"probs", std::vector<double>(report.mean.probs().begin(), report.mean.probs().end())},
          {"entropy", report.entropy},
          {"T", report.passes},
          {"classes", classes}};
}

}  // namespace hmc::mc
