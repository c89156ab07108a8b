#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace hmc {

using Rng = std::mt19937_64;

/// Mixes a base seed with a purpose tag and an index into an independent
/// stream seed (splitmix64 finalizer over an FNV-1a hash of the tag).
std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose, std::uint64_t index = 0);

/// FNV-1a over the raw bytes of a double array.
std::uint64_t hash_values(std::span<const double> values);

double uniform01(Rng& rng);

}  // namespace hmc
