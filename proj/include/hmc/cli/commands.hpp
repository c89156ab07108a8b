#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "hmc/cli/config.hpp"
#include "hmc/metrics/evaluate.hpp"

namespace hmc::cli {

/// Command-line overrides of config fields.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> model;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> passes;
  std::optional<hierarchy::RoutingMode> mode;
};

/// Generates the synthetic dataset into --out (or dataset.synthetic.dir).
/// --seed replaces the generator seed.
nlohmann::json cmd_gen_synthetic(const RunConfig& config, const Overrides& overrides = {});

/// split, rebalance, per-epoch augmentation and two-stage training. Writes
/// <out>/model/ and <out>/train_log.json. --seed replaces both stage seeds
/// (stage 2 uses seed + 1).
nlohmann::json cmd_train(const RunConfig& config, const Overrides& overrides = {});

struct EvalOutputs {
  metrics::Evaluation without_uq;
  metrics::Evaluation with_uq;
};

/// Re-derives the test split from the config and scores it with and without
/// MC dropout. Writes metrics_{without,with}_uq.json, per-class ROC CSVs and
/// confusion-matrix CSVs under <out>/eval/.
EvalOutputs cmd_eval(const RunConfig& config, const Overrides& overrides = {});

/// Hierarchical prediction for one image file.
nlohmann::json cmd_predict(const std::filesystem::path& model_dir, const std::filesystem::path& image,
                           std::size_t passes = 50, hierarchy::RoutingMode mode = hierarchy::RoutingMode::soft,
                           std::uint64_t seed = 0);

/// The config's test split, preprocessed to the configured size.
data::Dataset load_test_split(const RunConfig& config);

std::filesystem::path model_dir(const RunConfig& config, const Overrides& overrides);

}  // namespace hmc::cli
