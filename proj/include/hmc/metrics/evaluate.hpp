#pragma once

#include <functional>
#include <optional>

#include "hmc/hierarchy/two_stage.hpp"
#include "hmc/metrics/metrics.hpp"

namespace hmc::metrics {

struct SampleOutcome {
  std::size_t truth = 0;
  std::size_t predicted = 0;
  std::array<double, data::kNumSubtypes> composed{};  // soft product-rule scores
  double composed_entropy = 0.0;
  double stage1_entropy = 0.0;
  std::optional<double> stage2_entropy;
};

struct Evaluation {
  MetricsReport report;
  std::vector<SampleOutcome> samples;
  double mean_composed_entropy = 0.0;
  std::size_t passes = 0;  // 0 for the deterministic baseline
  hierarchy::RoutingMode mode = hierarchy::RoutingMode::soft;
};

/// Soft-mode prediction for one preprocessed input.
using Predictor = std::function<hierarchy::HierarchicalPrediction(const nn::Tensor&)>;

/// Scores every test sample. Labels follow `mode`; ROC/AUC always use the
/// soft composed probabilities.
Evaluation evaluate(const data::Dataset& test, const Predictor& predictor, std::size_t passes,
                    hierarchy::RoutingMode mode = hierarchy::RoutingMode::soft);

Evaluation evaluate(const hierarchy::TwoStageModel& model, const data::Dataset& test,
                    const std::optional<mc::MCConfig>& mc, hierarchy::RoutingMode mode = hierarchy::RoutingMode::soft);

nlohmann::json to_json(const Evaluation& evaluation);

}  // namespace hmc::metrics
