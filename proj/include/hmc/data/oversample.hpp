#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "hmc/core/rng.hpp"
#include "hmc/data/dataset.hpp"

namespace hmc::data {

using FeatureVector = std::vector<double>;

struct SyntheticPoint {
  FeatureVector values;
  std::size_t base = 0;      // index into the minority set
  std::size_t neighbor = 0;  // minority index interpolated toward
  double lambda = 0.0;
};

/// Draws the interpolation weight for one synthetic point.
using LambdaSource = std::function<double(Rng&)>;

/// ADASYN: generates target_count - |minority| interpolants, allotting more of
/// them to minority points whose k nearest neighbours (in minority + majority,
/// Euclidean, brute force) are mostly majority points. Allotments are rounded
/// by largest remainder so they sum exactly; each interpolant lies on the
/// segment from its base point to one of the base's k nearest minority neighbours.
std::vector<SyntheticPoint> adasyn(const std::vector<FeatureVector>& minority,
                                   const std::vector<FeatureVector>& majority, std::size_t k,
                                   std::size_t target_count, std::uint64_t seed);

std::vector<SyntheticPoint> adasyn(const std::vector<FeatureVector>& minority,
                                   const std::vector<FeatureVector>& majority, std::size_t k,
                                   std::size_t target_count, Rng& rng, const LambdaSource& lambda);

/// Indices of a random oversampling to `target_count`: 0..n-1 in order, then
/// target_count - n uniform draws with replacement.
std::vector<std::size_t> oversample_indices(std::size_t n, std::size_t target_count, std::uint64_t seed);

/// Every input once, followed by copies flagged duplicate = true.
std::vector<SampleRecord> random_oversample(const std::vector<SampleRecord>& samples,
                                            std::size_t target_count, std::uint64_t seed);

enum class OversampleMethod { adasyn, random };

struct RebalancePolicy {
  SubtypeLabel reference = SubtypeLabel::luminal;  // classes are raised to its count
  std::optional<std::size_t> target;                // explicit count, overrides reference
  std::map<SubtypeLabel, OversampleMethod> methods{
      {SubtypeLabel::triple_negative, OversampleMethod::adasyn},
      {SubtypeLabel::her2_enriched, OversampleMethod::random}};
  std::size_t k = 5;
};

/// Raises each class listed in the policy to the target (by default the
/// reference class count).
/// ADASYN works on flattened pixel tensors, so those classes (and the
/// majority they are compared against) must be materialised. Originals keep
/// their order; generated records follow, class by class.
Dataset rebalance(const Dataset& train, const RebalancePolicy& policy, std::uint64_t seed);

}  // namespace hmc::data
