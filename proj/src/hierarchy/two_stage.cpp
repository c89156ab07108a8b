#include "hmc/hierarchy/two_stage.hpp"

#include <algorithm>
#include <fstream>

#include "hmc/core/error.hpp"
#include "hmc/core/rng.hpp"
#include "hmc/data/oversample.hpp"

namespace hmc::hierarchy {

using data::SubtypeLabel;
using nlohmann::json;

std::size_t BinaryDataset::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::size_t{0}));
}

nn::TrainingSet BinaryDataset::training_set() const {
  nn::TrainingSet set;
  set.inputs.reserve(records.size());
  for (const auto& r : records) {
    if (!r.pixels) throw ValidationError("record " + r.image + " has no pixels; materialise the dataset first");
    set.inputs.push_back(*r.pixels);
  }
  set.labels = labels;
  return set;
}

BinaryDataset relabel_stage1(const data::Dataset& dataset) {
  BinaryDataset out;
  for (const auto& r : dataset.records()) {
    out.records.push_back(r);
    out.labels.push_back(r.label == SubtypeLabel::triple_negative ? 0 : 1);
  }
  return out;
}

BinaryDataset relabel_stage2(const data::Dataset& dataset) {
  BinaryDataset out;
  for (const auto& r : dataset.records()) {
    if (r.label == SubtypeLabel::triple_negative) continue;
    out.records.push_back(r);
    out.labels.push_back(r.label == SubtypeLabel::luminal ? 0 : 1);
  }
  if (out.records.empty()) throw ValidationError("stage 2 has no Luminal or HER2 samples to train on");
  return out;
}

namespace {

void check_binary_spec(const nn::NetworkSpec& spec, const char* stage) {
  if (spec.n_classes() != 2)
    throw ValidationError(std::string(stage) + " network must have a 2-class softmax head, has " +
                          std::to_string(spec.n_classes()));
}

Stage train_stage(const char* name, const data::Dataset& rebalanced, const BinaryDataset& binary,
                  const data::Dataset& originals, const StageConfig& config) {
  Stage stage{config.spec, nn::init_params(config.spec, config.train.seed), {}};
  nn::TrainingSet set = binary.training_set();
  for (const auto& x : set.inputs)
    if (x.shape() != config.spec.input_shape())
      throw ValidationError(std::string(name) + ": sample shape " + nn::shape_string(x.shape()) +
                            " does not match network input " + nn::shape_string(config.spec.input_shape()));
  nn::SampleTransform transform;
  if (config.augment) {
    config.augment->validate();
    transform = [cfg = *config.augment](const nn::Tensor& x, Rng& rng) { return data::augment(x, cfg, rng); };
  }
  nn::TrainResult result;
  try {
    result = nn::train(config.spec, std::move(stage.params), set, config.train, transform);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  }
  stage.params = std::move(result.params);
  StageMeta& m = stage.meta;
  m.seed = config.train.seed;
  m.epochs = config.train.epochs;
  m.counts_before = originals.counts();
  m.counts_after = rebalanced.counts();
  m.positives = binary.positives();
  m.negatives = binary.negatives();
  m.loss_history = std::move(result.loss_history);
  m.train_accuracy = nn::training_accuracy(config.spec, stage.params, set);
  m.train = config.train;
  m.augment = config.augment;
  return stage;
}

}  // namespace

TwoStageModel train_two_stage(const data::Dataset& train, const StageConfig& stage1, const StageConfig& stage2) {
  check_binary_spec(stage1.spec, "stage 1");
  check_binary_spec(stage2.spec, "stage 2");
  for (auto label : data::kSubtypes)
    if (train.count(label) == 0)
      throw ValidationError("training data has no samples of class " + std::string(data::to_string(label)));

  const std::size_t non_tn = train.count(SubtypeLabel::luminal) + train.count(SubtypeLabel::her2_enriched);
  data::RebalancePolicy policy1;
  policy1.methods = {{SubtypeLabel::triple_negative, data::OversampleMethod::adasyn}};
  policy1.target = non_tn;
  policy1.k = stage1.adasyn_k;
  data::Dataset balanced1 = data::rebalance(train, policy1, derive_seed(stage1.train.seed, "adasyn"));

  data::RebalancePolicy policy2;
  policy2.methods = {{SubtypeLabel::her2_enriched, data::OversampleMethod::random}};
  policy2.k = stage2.adasyn_k;
  data::Dataset balanced2 = data::rebalance(train, policy2, derive_seed(stage2.train.seed, "oversample"));

  return {train_stage("stage 1", balanced1, relabel_stage1(balanced1), train, stage1),
          train_stage("stage 2", balanced2, relabel_stage2(balanced2), train, stage2)};
}

nn::ClassDistribution compose_distribution(const nn::ClassDistribution& p1, const nn::ClassDistribution& p2) {
  if (p1.size() != 2 || p2.size() != 2) throw ValidationError("stage distributions must be binary");
  return nn::ClassDistribution({p1[0], p1[1] * p2[0], p1[1] * p2[1]});
}

std::string_view to_string(RoutingMode mode) { return mode == RoutingMode::soft ? "soft" : "hard"; }

RoutingMode parse_routing_mode(std::string_view text) {
  if (text == "soft") return RoutingMode::soft;
  if (text == "hard") return RoutingMode::hard;
  throw ValidationError("routing mode must be 'soft' or 'hard', got '" + std::string(text) + "'");
}

data::SubtypeLabel composed_label(const nn::ClassDistribution& composed) {
  return data::subtype_at(composed.argmax());
}

nn::ClassDistribution route(const nn::ClassDistribution& p1, const std::optional<nn::ClassDistribution>& p2,
                            RoutingMode mode) {
  if (mode == RoutingMode::hard && p1.argmax() == 0) {
    const double rest = (1.0 - p1[0]) / 2.0;
    return nn::ClassDistribution({p1[0], rest, rest});
  }
  if (!p2) throw ValidationError("stage 2 output is required unless hard routing stops at TN");
  return compose_distribution(p1, *p2);
}

namespace {

mc::UncertaintyReport run_stage(const Stage& stage, const nn::Tensor& input, const std::optional<mc::MCConfig>& mc,
                                std::string_view tag) {
  if (!mc) {
    mc::UncertaintyReport r;
    r.mean = mc::deterministic_predict(stage.spec, stage.params, input);
    r.entropy = mc::predictive_entropy(r.mean);
    return r;
  }
  mc::MCConfig cfg = *mc;
  cfg.seed = derive_seed(derive_seed(mc->seed, tag), "input", hash_values(input.values()));
  return mc::mc_forward(stage.spec, stage.params, input, cfg);
}

}  // namespace

HierarchicalPrediction predict(const TwoStageModel& model, const nn::Tensor& input,
                               const std::optional<mc::MCConfig>& mc, RoutingMode mode) {
  HierarchicalPrediction out;
  out.stage1 = run_stage(model.stage1, input, mc, "stage1");
  if (!(mode == RoutingMode::hard && out.stage1.mean.argmax() == 0))
    out.stage2 = run_stage(model.stage2, input, mc, "stage2");
  out.composed = route(out.stage1.mean,
                       out.stage2 ? std::optional<nn::ClassDistribution>(out.stage2->mean) : std::nullopt, mode);
  out.composed_entropy = mc::predictive_entropy(out.composed);
  out.label = composed_label(out.composed);
  return out;
}

json to_json(const HierarchicalPrediction& p) {
  std::vector<std::string> classes;
  for (auto label : data::kSubtypes) classes.emplace_back(data::to_string(label));
  json j{{"classes", classes},
         {"probs", std::vector<double>(p.composed.probs().begin(), p.composed.probs().end())},
         {"label", data::to_string(p.label)},
         {"composed_entropy", p.composed_entropy},
         {"T", p.stage1.passes},
         {"stage1", mc::to_json(p.stage1, {"TN", "non-TN"})}};
  j["stage2"] = p.stage2 ? mc::to_json(*p.stage2, {"Luminal", "HER2"}) : json(nullptr);
  return j;
}

json train_config_to_json(const nn::TrainConfig& c) {
  return {{"lr", c.lr},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"reg", c.reg},
          {"l2_scope", c.l2_scope == nn::L2Scope::classifier ? "classifier" : "all"},
          {"seed", c.seed},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}}};
}

nn::TrainConfig train_config_from_json(const json& j) {
  nn::TrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.reg = j.value("reg", c.reg);
  const std::string scope = j.value("l2_scope", std::string("classifier"));
  if (scope != "classifier" && scope != "all") throw ValidationError("l2_scope must be 'classifier' or 'all'");
  c.l2_scope = scope == "all" ? nn::L2Scope::all : nn::L2Scope::classifier;
  c.seed = j.value("seed", c.seed);
  if (j.contains("adam")) {
    const json& a = j["adam"];
    c.adam.beta1 = a.value("beta1", c.adam.beta1);
    c.adam.beta2 = a.value("beta2", c.adam.beta2);
    c.adam.epsilon = a.value("epsilon", c.adam.epsilon);
  }
  return c;
}

json augment_config_to_json(const data::AugmentConfig& c) {
  return {{"max_rotation_deg", c.max_rotation_deg}, {"horizontal_flip", c.horizontal_flip},
          {"vertical_flip", c.vertical_flip}};
}

data::AugmentConfig augment_config_from_json(const json& j) {
  data::AugmentConfig c;
  c.max_rotation_deg = j.value("max_rotation_deg", c.max_rotation_deg);
  c.horizontal_flip = j.value("horizontal_flip", c.horizontal_flip);
  c.vertical_flip = j.value("vertical_flip", c.vertical_flip);
  c.validate();
  return c;
}

namespace {

}  // namespace

json to_json(const StageMeta& m) {
  auto counts = [](const std::array<std::size_t, data::kNumSubtypes>& c) {
    json o = json::object();
    for (auto label : data::kSubtypes) o[std::string(data::to_string(label))] = c[data::index_of(label)];
    return o;
  };
  return {{"seed", m.seed},
          {"epochs", m.epochs},
          {"counts_before_rebalance", counts(m.counts_before)},
          {"counts_after_rebalance", counts(m.counts_after)},
          {"positives", m.positives},
          {"negatives", m.negatives},
          {"loss_history", m.loss_history},
          {"train_accuracy", m.train_accuracy},
          {"train", train_config_to_json(m.train)},
          {"augment", m.augment ? augment_config_to_json(*m.augment) : json(nullptr)}};
}

namespace {

StageMeta meta_from_json(const json& j) {
  StageMeta m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.epochs = j.at("epochs").get<std::size_t>();
  for (auto label : data::kSubtypes) {
    const std::string name(data::to_string(label));
    m.counts_before[data::index_of(label)] = j.at("counts_before_rebalance").at(name).get<std::size_t>();
    m.counts_after[data::index_of(label)] = j.at("counts_after_rebalance").at(name).get<std::size_t>();
  }
  m.positives = j.at("positives").get<std::size_t>();
  m.negatives = j.at("negatives").get<std::size_t>();
  m.loss_history = j.at("loss_history").get<std::vector<double>>();
  m.train_accuracy = j.at("train_accuracy").get<double>();
  m.train = train_config_from_json(j.at("train"));
  if (!j.at("augment").is_null()) m.augment = augment_config_from_json(j.at("augment"));
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace

void save_model(const TwoStageModel& model, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create model directory " + dir.string() + ": " + ec.message());
  std::vector<std::string> classes;
  for (auto label : data::kSubtypes) classes.emplace_back(data::to_string(label));
  json meta{{"class_order", classes},
            {"stage1", to_json(model.stage1.meta)},
            {"stage2", to_json(model.stage2.meta)}};
  for (auto [name, stage] : {std::pair{"stage1", &model.stage1}, std::pair{"stage2", &model.stage2}}) {
    write_text(dir / (std::string(name) + ".spec.json"), stage->spec.to_json().dump(2) + "\n");
    nn::save_params(stage->params, dir / (std::string(name) + ".params.bin"));
  }
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

TwoStageModel load_model(const std::filesystem::path& dir) {
  json meta = read_json(dir / "meta.json");
  std::vector<std::string> classes;
  for (auto label : data::kSubtypes) classes.emplace_back(data::to_string(label));
  if (meta.value("class_order", std::vector<std::string>{}) != classes)
    throw ValidationError("model class order does not match TN, Luminal, HER2");
  auto load_stage = [&](const std::string& name) {
    try {
      Stage stage{nn::NetworkSpec::from_json(read_json(dir / (name + ".spec.json"))), {}, meta_from_json(meta.at(name))};
      check_binary_spec(stage.spec, name.c_str());
      stage.params = nn::load_params(stage.spec, dir / (name + ".params.bin"));
      return stage;
    } catch (const json::exception& e) {
      throw ValidationError(name + " metadata: " + e.what());
    }
  };
  return {load_stage("stage1"), load_stage("stage2")};
}

}  // namespace hmc::hierarchy
