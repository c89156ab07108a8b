#include "hmc/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "hmc/core/error.hpp"

namespace hmc::nn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

namespace {

void check_extents(const Shape& shape) {
  if (shape.empty()) throw ValidationError("tensor shape must have at least one extent");
  for (std::size_t e : shape)
    if (e == 0) throw ValidationError("tensor extents must be positive, got " + shape_string(shape));
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  values_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  check_extents(shape_);
  if (shape_size(shape_) != values_.size())
    throw ValidationError("tensor shape " + shape_string(shape_) + " does not match " +
                          std::to_string(values_.size()) + " values");
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), values_); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Tensor stack(std::span<const Tensor* const> items) {
  if (items.empty()) throw ValidationError("cannot stack an empty tensor list");
  const Shape& inner = items.front()->shape();
  Shape shape{items.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  std::vector<double> values;
  values.reserve(shape_size(shape));
  for (const Tensor* t : items) {
    if (t->shape() != inner)
      throw ValidationError("cannot stack tensors of shapes " + shape_string(inner) + " and " +
                            shape_string(t->shape()));
    values.insert(values.end(), t->values().begin(), t->values().end());
  }
  return Tensor(std::move(shape), std::move(values));
}

Tensor stack(std::span<const Tensor> items) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(items.size());
  for (const Tensor& t : items) ptrs.push_back(&t);
  return stack(std::span<const Tensor* const>(ptrs));
}

}  // namespace hmc::nn
