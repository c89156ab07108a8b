#include "hmc/metrics/evaluate.hpp"

#include "hmc/core/error.hpp"

namespace hmc::metrics {

Evaluation evaluate(const data::Dataset& test, const Predictor& predictor, std::size_t passes,
                    hierarchy::RoutingMode mode) {
  if (test.empty()) throw ValidationError("cannot evaluate an empty test set");
  Evaluation ev;
  ev.passes = passes;
  ev.mode = mode;
  std::vector<std::size_t> predicted, truths;
  std::vector<std::array<double, data::kNumSubtypes>> scores;
  double entropy_sum = 0.0;
  for (const auto& r : test.records()) {
    if (!r.pixels) throw ValidationError("test record " + r.image + " has no pixels; materialise the dataset first");
    hierarchy::HierarchicalPrediction p = predictor(*r.pixels);
    SampleOutcome s;
    s.truth = data::index_of(r.label);
    for (std::size_t c = 0; c < data::kNumSubtypes; ++c) s.composed[c] = p.composed[c];
    const std::optional<nn::ClassDistribution> p2 =
        p.stage2 ? std::optional<nn::ClassDistribution>(p.stage2->mean) : std::nullopt;
    s.predicted = data::index_of(hierarchy::composed_label(hierarchy::route(p.stage1.mean, p2, mode)));
    s.composed_entropy = p.composed_entropy;
    s.stage1_entropy = p.stage1.entropy;
    if (p.stage2) s.stage2_entropy = p.stage2->entropy;
    entropy_sum += s.composed_entropy;
    predicted.push_back(s.predicted);
    truths.push_back(s.truth);
    scores.push_back(s.composed);
    ev.samples.push_back(s);
  }
  ev.report = compute_report(predicted, truths, scores);
  ev.mean_composed_entropy = entropy_sum / static_cast<double>(test.size());
  return ev;
}

Evaluation evaluate(const hierarchy::TwoStageModel& model, const data::Dataset& test,
                    const std::optional<mc::MCConfig>& mc, hierarchy::RoutingMode mode) {
  return evaluate(
      test, [&](const nn::Tensor& x) { return hierarchy::predict(model, x, mc, hierarchy::RoutingMode::soft); },
      mc ? mc->passes : 0, mode);
}

nlohmann::json to_json(const Evaluation& ev) {
  nlohmann::json j = to_json(ev.report);
  j["uncertainty"] = {{"mc_dropout", ev.passes > 0},
                      {"T", ev.passes},
                      {"routing", hierarchy::to_string(ev.mode)},
                      {"mean_composed_entropy", ev.mean_composed_entropy}};
  j["n_samples"] = ev.samples.size();
  return j;
}

}  // namespace hmc::metrics
