#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hmc/data/augment.hpp"
#include "hmc/data/dataset.hpp"
#include "hmc/hierarchy/two_stage.hpp"
#include "hmc/nn/network_spec.hpp"
#include "hmc/nn/train.hpp"

namespace hmc::cli {

struct SyntheticConfig {
  std::array<std::size_t, data::kNumSubtypes> counts{40, 200, 60};  // images per class: TN, Luminal, HER2
  std::size_t size = 16;
  double noise = 0.1;  // Gaussian sigma on the [0, 1] intensity scale
  std::uint64_t seed = 7;
  std::size_t images_per_patient = 2;
  std::filesystem::path dir = "synthetic";
};

/// Run configuration. Defaults follow the published training setup; relative
/// paths are resolved against the config file's directory.
struct RunConfig {
  std::optional<std::filesystem::path> manifest;  // defaults to <synthetic.dir>/manifest.csv
  SyntheticConfig synthetic;
  std::size_t height = 224;
  std::size_t width = 224;
  data::SplitOptions split{0.8, 0, data::Grouping::by_patient};

  std::optional<std::vector<nn::LayerSpec>> backbone;  // defaults to nn::default_backbone()
  std::vector<std::size_t> classifier_widths{128, 128};
  double dropout = 0.5;

  nn::TrainConfig stage1 = stage_defaults(55, 1);
  nn::TrainConfig stage2 = stage_defaults(75, 2);
  std::optional<data::AugmentConfig> augment = data::AugmentConfig{};
  std::size_t adasyn_k = 5;

  std::size_t passes = 50;  // T
  hierarchy::RoutingMode mode = hierarchy::RoutingMode::soft;
  std::uint64_t mc_seed = 0;

  std::filesystem::path out_dir = "run";

  static nn::TrainConfig stage_defaults(std::size_t epochs, std::uint64_t seed);

  std::filesystem::path manifest_path() const { return manifest.value_or(synthetic.dir / "manifest.csv"); }
  nn::Shape input_shape() const { return {height, width, 3}; }
  nn::NetworkSpec stage_network() const;
  hierarchy::StageConfig stage_config(int stage) const;

  void validate() const;
};

/// Unknown keys are rejected so that typos do not silently fall back to defaults.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);

}  // namespace hmc::cli
