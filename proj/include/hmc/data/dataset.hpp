#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hmc/data/labels.hpp"
#include "hmc/nn/tensor.hpp"

namespace hmc::data {

struct SampleRecord {
  std::string image;                  // resolved file path, or a tag for generated samples
  std::optional<nn::Tensor> pixels;   // preprocessed (H, W, 3) tensor once materialised
  SubtypeLabel label = SubtypeLabel::luminal;
  std::string patient_id;
  View view = View::unknown;
  bool synthetic = false;  // ADASYN interpolant
  bool duplicate = false;  // random-oversampling copy
};

/// Ordered records with per-class counts kept in step with every mutation.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<SampleRecord> records);

  void add(SampleRecord record);

  const std::vector<SampleRecord>& records() const { return records_; }
  const SampleRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const std::array<std::size_t, kNumSubtypes>& counts() const { return counts_; }
  std::size_t count(SubtypeLabel label) const { return counts_[index_of(label)]; }

  bool materialized() const;

 private:
  std::vector<SampleRecord> records_;
  std::array<std::size_t, kNumSubtypes> counts_{};
};

/// CSV manifest with header `image,patient_id,view,label`. Image paths are
/// resolved against the manifest's directory; each image is decoded once to
/// confirm it is readable. Errors name the 1-based data row.
Dataset load_manifest(const std::filesystem::path& path);

/// Writes `records` as a manifest with image paths relative to the manifest directory.
void write_manifest(const std::filesystem::path& path, const Dataset& dataset);

/// Decodes and preprocesses every record that has no pixels yet.
Dataset materialize(const Dataset& dataset, std::size_t height, std::size_t width);

enum class Grouping { by_patient, by_image };

std::string_view to_string(Grouping grouping);
Grouping parse_grouping(std::string_view text);

struct SplitOptions {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  Grouping grouping = Grouping::by_patient;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::string> warnings;
};

/// Stratified, seeded partition over grouping units (patients or images).
/// The train side receives round(fraction * units) units, apportioned across
/// classes by largest remainder; a class with at least two units keeps at
/// least one on each side. Record order is preserved on both sides.
SplitResult split(const Dataset& dataset, const SplitOptions& options);

}  // namespace hmc::data
