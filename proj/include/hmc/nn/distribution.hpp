#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hmc::nn {

/// Probability vector over classes: values in [0, 1] summing to 1 within 1e-9.
class ClassDistribution {
 public:
  ClassDistribution() = default;
  explicit ClassDistribution(std::vector<double> probs);

  /// Divides non-negative weights by their sum.
  static ClassDistribution normalized(std::vector<double> weights);

  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

  /// Index of the largest probability; ties go to the lowest index.
  std::size_t argmax() const;

  friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;

 private:
  std::vector<double> probs_;
};

/// Max-subtracted softmax over finite logits (at least two).
ClassDistribution softmax(std::span<const double> logits);

}  // namespace hmc::nn
