#include "hmc/core/rng.hpp"

#include <cstring>

namespace hmc {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const unsigned char* bytes, std::size_t n, std::uint64_t h = kFnvOffset) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose, std::uint64_t index) {
  std::uint64_t tag = fnv1a(reinterpret_cast<const unsigned char*>(purpose.data()), purpose.size());
  return splitmix64(splitmix64(base ^ tag) + splitmix64(index));
}

std::uint64_t hash_values(std::span<const double> values) {
  return fnv1a(reinterpret_cast<const unsigned char*>(values.data()), values.size_bytes());
}

double uniform01(Rng& rng) {
  // 53 random mantissa bits; independent of the standard library's distribution code.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace hmc
