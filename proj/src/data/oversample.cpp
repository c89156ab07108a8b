#include "hmc/data/oversample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hmc/core/error.hpp"

namespace hmc::data {
namespace {

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Indices of the k nearest points to `query` among `points`, excluding
// `self`; ties are broken by index.
std::vector<std::size_t> nearest(const std::vector<const FeatureVector*>& points, std::size_t self,
                                 std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(points.size());
  for (std::size_t j = 0; j < points.size(); ++j)
    if (j != self) d.emplace_back(squared_distance(*points[self], *points[j]), j);
  k = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

}  // namespace

std::vector<SyntheticPoint> adasyn(const std::vector<FeatureVector>& minority,
                                   const std::vector<FeatureVector>& majority, std::size_t k,
                                   std::size_t target_count, Rng& rng, const LambdaSource& lambda) {
  const std::size_t m = minority.size();
  if (m < 2) throw ValidationError("ADASYN needs at least 2 minority samples, got " + std::to_string(m));
  if (k == 0 || k >= m + majority.size())
    throw ValidationError("ADASYN k must satisfy 0 < k < |minority| + |majority|");
  if (target_count < m) throw ValidationError("ADASYN target count is below the minority size");
  const std::size_t dim = minority.front().size();
  for (const auto* set : {&minority, &majority})
    for (const auto& v : *set)
      if (v.size() != dim) throw ValidationError("ADASYN feature vectors differ in length");

  const std::size_t G = target_count - m;
  if (G == 0) return {};

  std::vector<const FeatureVector*> combined;
  for (const auto& v : minority) combined.push_back(&v);
  for (const auto& v : majority) combined.push_back(&v);
  std::vector<const FeatureVector*> minority_only(combined.begin(), combined.begin() + static_cast<std::ptrdiff_t>(m));

  std::vector<double> ratio(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    auto nn = nearest(combined, i, k);
    const auto majority_hits = std::count_if(nn.begin(), nn.end(), [m](std::size_t j) { return j >= m; });
    ratio[i] = static_cast<double>(majority_hits) / static_cast<double>(k);
  }
  double total = std::accumulate(ratio.begin(), ratio.end(), 0.0);
  if (total == 0.0) {
    std::fill(ratio.begin(), ratio.end(), 1.0);
    total = static_cast<double>(m);
  }

  // Largest-remainder apportionment of G.
  std::vector<std::size_t> count(m);
  std::vector<double> frac(m);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double share = ratio[i] / total * static_cast<double>(G);
    count[i] = static_cast<std::size_t>(std::floor(share));
    frac[i] = share - std::floor(share);
    assigned += count[i];
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t j = 0; assigned < G; j = (j + 1) % m) {
    count[order[j]] += 1;
    ++assigned;
  }

  std::vector<SyntheticPoint> out;
  out.reserve(G);
  for (std::size_t i = 0; i < m; ++i) {
    if (count[i] == 0) continue;
    auto neighbours = nearest(minority_only, i, k);
    for (std::size_t n = 0; n < count[i]; ++n) {
      const std::size_t z = neighbours[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(neighbours.size()))];
      const double lam = lambda(rng);
      SyntheticPoint s{minority[i], i, z, lam};
      for (std::size_t d = 0; d < dim; ++d) s.values[d] += lam * (minority[z][d] - minority[i][d]);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<SyntheticPoint> adasyn(const std::vector<FeatureVector>& minority,
                                   const std::vector<FeatureVector>& majority, std::size_t k,
                                   std::size_t target_count, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "adasyn"));
  return adasyn(minority, majority, k, target_count, rng, [](Rng& r) { return uniform01(r); });
}

std::vector<std::size_t> oversample_indices(std::size_t n, std::size_t target_count, std::uint64_t seed) {
  if (n == 0) throw ValidationError("cannot oversample an empty sample list");
  if (target_count < n) throw ValidationError("oversampling target is below the sample count");
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "oversample"));
  for (std::size_t k = n; k < target_count; ++k)
    out.push_back(std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n))));
  return out;
}

std::vector<SampleRecord> random_oversample(const std::vector<SampleRecord>& samples,
                                            std::size_t target_count, std::uint64_t seed) {
  auto idx = oversample_indices(samples.size(), target_count, seed);
  std::vector<SampleRecord> out;
  out.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.push_back(samples[idx[k]]);
    if (k >= samples.size()) out.back().duplicate = true;
  }
  return out;
}

namespace {

FeatureVector flatten(const SampleRecord& r) {
  if (!r.pixels) throw ValidationError("ADASYN needs materialised pixels (record " + r.image + ")");
  return {r.pixels->values().begin(), r.pixels->values().end()};
}

}  // namespace

Dataset rebalance(const Dataset& train, const RebalancePolicy& policy, std::uint64_t seed) {
  const std::size_t target = policy.target.value_or(train.count(policy.reference));
  Dataset out(train.records());
  for (const auto& [label, method] : policy.methods) {
    if (label == policy.reference) continue;
    std::vector<SampleRecord> members;
    for (const auto& r : train.records())
      if (r.label == label) members.push_back(r);
    if (members.size() >= target) continue;
    const std::string name(to_string(label));
    if (members.size() < 2)
      throw ValidationError("cannot rebalance class " + name + ": needs at least 2 training samples, has " +
                            std::to_string(members.size()));
    const std::uint64_t class_seed = derive_seed(seed, "rebalance", index_of(label));
    if (method == OversampleMethod::random) {
      auto grown = random_oversample(members, target, class_seed);
      for (std::size_t k = members.size(); k < grown.size(); ++k) out.add(std::move(grown[k]));
      continue;
    }
    std::vector<FeatureVector> minority, majority;
    for (const auto& r : members) minority.push_back(flatten(r));
    for (const auto& r : train.records())
      if (r.label != label) majority.push_back(flatten(r));
    auto synth = adasyn(minority, majority, std::min(policy.k, minority.size() + majority.size() - 1), target,
                        class_seed);
    for (std::size_t n = 0; n < synth.size(); ++n) {
      const SampleRecord& base = members[synth[n].base];
      SampleRecord r;
      r.image = "synthetic:" + name + ":" + std::to_string(n);
      r.pixels = nn::Tensor(base.pixels->shape(), std::move(synth[n].values));
      r.label = label;
      r.patient_id = "synthetic-" + base.patient_id + "-" + std::to_string(n);
      r.view = View::unknown;
      r.synthetic = true;
      out.add(std::move(r));
    }
  }
  return out;
}

}  // namespace hmc::data
