#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hmc/data/augment.hpp"
#include "hmc/data/dataset.hpp"
#include "hmc/mc/mc.hpp"
#include "hmc/nn/train.hpp"

namespace hmc::hierarchy {

/// Binary relabelling. Index 0 is the positive class of the stage: TN for
/// stage 1, Luminal for stage 2. This matches the composed class order.
struct BinaryDataset {
  std::vector<data::SampleRecord> records;
  std::vector<std::size_t> labels;

  std::size_t size() const { return records.size(); }
  std::size_t positives() const;
  std::size_t negatives() const { return size() - positives(); }

  /// Requires materialised pixels.
  nn::TrainingSet training_set() const;
};

BinaryDataset relabel_stage1(const data::Dataset& dataset);
BinaryDataset relabel_stage2(const data::Dataset& dataset);  // drops TN; throws if nothing remains

struct StageConfig {
  nn::NetworkSpec spec;  // must end in a 2-class softmax
  nn::TrainConfig train;
  std::optional<data::AugmentConfig> augment;
  std::size_t adasyn_k = 5;
};

struct StageMeta {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  std::array<std::size_t, data::kNumSubtypes> counts_before{};  // training originals per class
  std::array<std::size_t, data::kNumSubtypes> counts_after{};   // after rebalancing
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::vector<double> loss_history;
  double train_accuracy = 0.0;
  nn::TrainConfig train;
  std::optional<data::AugmentConfig> augment;
};

struct Stage {
  nn::NetworkSpec spec;
  nn::ModelParams params;
  StageMeta meta;
};

struct TwoStageModel {
  Stage stage1;  // TN vs rest
  Stage stage2;  // Luminal vs HER2
};

/// Stage 1 raises TN by ADASYN to the non-TN count; stage 2 drops TN and
/// raises HER2 by random oversampling to the Luminal count. Each stage then
/// trains on its relabelled set, augmenting per epoch when configured.
TwoStageModel train_two_stage(const data::Dataset& train, const StageConfig& stage1, const StageConfig& stage2);

/// (p1[0], p1[1] * p2[0], p1[1] * p2[1]) over TN, Luminal, HER2.
nn::ClassDistribution compose_distribution(const nn::ClassDistribution& p1, const nn::ClassDistribution& p2);

enum class RoutingMode { soft, hard };

std::string_view to_string(RoutingMode mode);
RoutingMode parse_routing_mode(std::string_view text);

struct HierarchicalPrediction {
  nn::ClassDistribution composed;
  mc::UncertaintyReport stage1;
  std::optional<mc::UncertaintyReport> stage2;  // empty when hard routing stops at TN
  double composed_entropy = 0.0;
  data::SubtypeLabel label = data::SubtypeLabel::triple_negative;
};

/// Label from a composed distribution, ties resolved as TN < Luminal < HER2.
data::SubtypeLabel composed_label(const nn::ClassDistribution& composed);

/// Composition of already computed stage outputs. In hard mode a stage-1 TN
/// decision ignores p2 and splits the remaining mass evenly.
nn::ClassDistribution route(const nn::ClassDistribution& p1, const std::optional<nn::ClassDistribution>& p2,
                            RoutingMode mode);

/// Runs both stages (deterministic without `mc`, MC dropout with it). MC pass
/// seeds mix the configured seed with the stage and a hash of the input, so a
/// prediction does not depend on which other inputs were scored before it.
HierarchicalPrediction predict(const TwoStageModel& model, const nn::Tensor& input,
                               const std::optional<mc::MCConfig>& mc = std::nullopt,
                               RoutingMode mode = RoutingMode::soft);

nlohmann::json to_json(const HierarchicalPrediction& prediction);
nlohmann::json to_json(const StageMeta& meta);

nlohmann::json train_config_to_json(const nn::TrainConfig& config);
nn::TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json augment_config_to_json(const data::AugmentConfig& config);
data::AugmentConfig augment_config_from_json(const nlohmann::json& j);

/// Directory layout: stage{1,2}.spec.json, stage{1,2}.params.bin, meta.json.
void save_model(const TwoStageModel& model, const std::filesystem::path& dir);
TwoStageModel load_model(const std::filesystem::path& dir);

}  // namespace hmc::hierarchy
