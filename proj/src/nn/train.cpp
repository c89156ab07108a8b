#include "hmc/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hmc/core/error.hpp"
#include "hmc/nn/loss.hpp"

namespace hmc::nn {
namespace {

void validate(const NetworkSpec& spec, const TrainingSet& data, const TrainConfig& config) {
  if (data.inputs.empty()) throw ValidationError("training set is empty");
  if (data.inputs.size() != data.labels.size())
    throw ValidationError("training inputs and labels differ in length");
  std::set<std::size_t> classes(data.labels.begin(), data.labels.end());
  if (*classes.rbegin() >= spec.n_classes())
    throw ValidationError("training label exceeds the network's " + std::to_string(spec.n_classes()) +
                          " classes");
  if (classes.size() < 2)
    throw ValidationError("training set contains a single class (" + std::to_string(*classes.begin()) +
                          ")");
  if (!(config.lr >= 0.0) || config.batch_size == 0 || config.epochs == 0 || config.reg < 0.0)
    throw ValidationError("training config needs lr >= 0, batch_size > 0, epochs > 0, reg >= 0");
}

}  // namespace

TrainResult train(const NetworkSpec& spec, ModelParams params, const TrainingSet& data,
                  const TrainConfig& config, const SampleTransform& transform) {
  validate(spec, data, config);
  check_params(spec, params);

  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  Rng augment_rng(derive_seed(config.seed, "augment"));

  const LayerFilter filter = layers_in(config.l2_scope == L2Scope::classifier ? spec.classifier_layers()
                                                                              : spec.parametric_layers());
  AdamState adam = AdamState::for_params(params, config.adam);
  TrainResult result;
  std::vector<std::size_t> order(data.inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<Tensor> owned;
      std::vector<const Tensor*> batch;
      std::vector<std::size_t> targets;
      owned.reserve(stop - start);
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t idx = order[k];
        if (transform) {
          owned.push_back(transform(data.inputs[idx], augment_rng));
          batch.push_back(&owned.back());
        } else {
          batch.push_back(&data.inputs[idx]);
        }
        targets.push_back(data.labels[idx]);
      }
      ForwardResult fwd = forward(spec, params, stack(std::span<const Tensor* const>(batch)),
                                  Mode::train, dropout_rng);
      BatchLoss loss = batch_bce(fwd.output, targets);

      // Fused softmax/cross-entropy gradient at the logits: (p - onehot) / batch.
      Tensor seed = fwd.output;
      const std::size_t k = seed.shape()[1];
      const double scale = 1.0 / static_cast<double>(targets.size());
      for (std::size_t b = 0; b < targets.size(); ++b) {
        for (std::size_t j = 0; j < k; ++j) seed[b * k + j] *= scale;
        seed[b * k + targets[b]] -= scale;
      }
      ModelParams grads = backward(spec, params, fwd.trace, seed, GradientSeed::logits);
      Penalty penalty = l2_penalty(params, config.reg, filter);
      for (auto& [i, g] : grads.layers) {
        const LayerParams& pg = penalty.gradient.layers.at(i);
        for (std::size_t j = 0; j < g.weight.size(); ++j) g.weight[j] += pg.weight[j];
      }
      adam_step(adam, params, grads, config.lr);
      const double batch_loss = loss.value + penalty.value;
      if (!std::isfinite(batch_loss)) throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
      epoch_loss += batch_loss * static_cast<double>(targets.size());
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  result.params = std::move(params);
  return result;
}

double training_accuracy(const NetworkSpec& spec, const ModelParams& params, const TrainingSet& data) {
  if (data.inputs.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    Tensor out = forward_eval(spec, params, data.inputs[i]);
    auto row = out.values();
    std::size_t arg = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (arg == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.inputs.size());
}

}  // namespace hmc::nn
