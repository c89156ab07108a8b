#pragma once

#include <filesystem>

#include "hmc/cli/config.hpp"
#include "hmc/data/image.hpp"

namespace hmc::cli {

/// 8-bit class motif on a dark background: TN a filled disc, Luminal a ring,
/// HER2 a ring with a central dot.
data::Image synthetic_template(data::SubtypeLabel label, std::size_t size);

/// Template plus seeded Gaussian noise (sigma on the [0, 1] scale), rounded and clamped to 8 bits.
data::Image synthetic_image(data::SubtypeLabel label, std::size_t size, double noise, std::uint64_t seed);

/// Writes images/<class>_<patient>_<view>.pgm and manifest.csv under `dir`.
/// Each patient contributes up to images_per_patient views of one class.
data::Dataset generate_synthetic(const SyntheticConfig& config, const std::filesystem::path& dir);

}  // namespace hmc::cli
