#include "hmc/cli/config.hpp"

#include <fstream>
#include <set>

#include "hmc/core/error.hpp"

namespace hmc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

nn::TrainConfig RunConfig::stage_defaults(std::size_t epochs, std::uint64_t seed) {
  nn::TrainConfig c;
  c.lr = 1e-4;
  c.batch_size = 32;
  c.reg = 1e-6;
  c.epochs = epochs;
  c.seed = seed;
  return c;
}

nn::NetworkSpec RunConfig::stage_network() const {
  nn::BackboneOptions opts;
  opts.classifier_widths = classifier_widths;
  opts.dropout_rate = dropout;
  opts.n_classes = 2;
  return nn::with_classifier_block(input_shape(), backbone.value_or(nn::default_backbone()), opts);
}

hierarchy::StageConfig RunConfig::stage_config(int stage) const {
  return {stage_network(), stage == 1 ? stage1 : stage2, augment, adasyn_k};
}

void RunConfig::validate() const {
  if (height == 0 || width == 0) throw ValidationError("dataset.target_size must be positive");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0))
    throw ValidationError("dataset.split.train_fraction must lie strictly between 0 and 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("model.dropout must lie in [0, 1)");
  for (const auto* s : {&stage1, &stage2})
    if (!(s->lr >= 0.0) || s->batch_size == 0 || s->epochs == 0 || s->reg < 0.0)
      throw ValidationError("training needs lr >= 0, batch_size > 0, epochs > 0 and reg >= 0");
  if (augment) augment->validate();
  if (adasyn_k == 0) throw ValidationError("training.adasyn_k must be positive");
  if (passes == 0) throw ValidationError("inference.T must be at least 1");
  if (synthetic.size < 4) throw ValidationError("dataset.synthetic.size must be at least 4");
  if (!(synthetic.noise >= 0.0)) throw ValidationError("dataset.synthetic.noise must be non-negative");
  if (synthetic.images_per_patient == 0) throw ValidationError("dataset.synthetic.images_per_patient must be positive");
  stage_network();
}

namespace {

void check_keys(const json& j, const std::string& section, std::set<std::string> allowed) {
  if (!j.is_object()) throw ValidationError("config section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ValidationError("unknown config key '" + section + "." + key + "'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

RunConfig config_from_json(const json& root, const fs::path& base) {
  RunConfig c;
  try {
    check_keys(root, "config", {"dataset", "model", "training", "inference", "output"});
    if (root.contains("dataset")) {
      const json& d = root["dataset"];
      check_keys(d, "dataset", {"manifest", "target_size", "split", "synthetic"});
      if (d.contains("manifest") && !d["manifest"].is_null()) c.manifest = resolve(base, d["manifest"].get<std::string>());
      if (d.contains("target_size")) {
        auto ts = d["target_size"].get<std::vector<std::size_t>>();
        if (ts.size() != 2) throw ValidationError("dataset.target_size must be [height, width]");
        c.height = ts[0];
        c.width = ts[1];
      }
      if (d.contains("split")) {
        const json& s = d["split"];
        check_keys(s, "dataset.split", {"train_fraction", "seed", "grouping"});
        read(s, "train_fraction", c.split.train_fraction);
        read(s, "seed", c.split.seed);
        if (s.contains("grouping")) c.split.grouping = data::parse_grouping(s["grouping"].get<std::string>());
      }
      if (d.contains("synthetic")) {
        const json& s = d["synthetic"];
        check_keys(s, "dataset.synthetic", {"counts", "size", "noise", "seed", "images_per_patient", "dir"});
        if (s.contains("counts")) {
          check_keys(s["counts"], "dataset.synthetic.counts", {"TN", "Luminal", "HER2"});
          for (auto label : data::kSubtypes) read(s["counts"], std::string(data::to_string(label)).c_str(),
                                                  c.synthetic.counts[data::index_of(label)]);
        }
        read(s, "size", c.synthetic.size);
        read(s, "noise", c.synthetic.noise);
        read(s, "seed", c.synthetic.seed);
        read(s, "images_per_patient", c.synthetic.images_per_patient);
        if (s.contains("dir")) c.synthetic.dir = resolve(base, s["dir"].get<std::string>());
      }
    }
    if (!root.contains("dataset") || !root["dataset"].contains("synthetic") ||
        !root["dataset"]["synthetic"].contains("dir"))
      c.synthetic.dir = resolve(base, c.synthetic.dir.string());

    if (root.contains("model")) {
      const json& m = root["model"];
      check_keys(m, "model", {"backbone", "classifier_widths", "dropout"});
      if (m.contains("backbone") && !m["backbone"].is_null()) {
        std::vector<nn::LayerSpec> layers;
        for (const auto& l : m["backbone"]) layers.push_back(nn::layer_from_json(l));
        c.backbone = layers;
      }
      read(m, "classifier_widths", c.classifier_widths);
      read(m, "dropout", c.dropout);
    }

    if (root.contains("training")) {
      const json& t = root["training"];
      check_keys(t, "training", {"lr", "batch_size", "reg", "epochs", "seeds", "augment", "adasyn_k", "l2_scope"});
      for (auto* s : {&c.stage1, &c.stage2}) {
        read(t, "lr", s->lr);
        read(t, "batch_size", s->batch_size);
        read(t, "reg", s->reg);
        if (t.contains("l2_scope")) {
          const auto scope = t["l2_scope"].get<std::string>();
          if (scope != "classifier" && scope != "all")
            throw ValidationError("training.l2_scope must be 'classifier' or 'all'");
          s->l2_scope = scope == "all" ? nn::L2Scope::all : nn::L2Scope::classifier;
        }
      }
      if (t.contains("epochs")) {
        check_keys(t["epochs"], "training.epochs", {"stage1", "stage2"});
        read(t["epochs"], "stage1", c.stage1.epochs);
        read(t["epochs"], "stage2", c.stage2.epochs);
      }
      if (t.contains("seeds")) {
        check_keys(t["seeds"], "training.seeds", {"stage1", "stage2"});
        read(t["seeds"], "stage1", c.stage1.seed);
        read(t["seeds"], "stage2", c.stage2.seed);
      }
      if (t.contains("augment"))
        c.augment = t["augment"].is_null() ? std::nullopt
                                           : std::optional(hierarchy::augment_config_from_json(t["augment"]));
      read(t, "adasyn_k", c.adasyn_k);
    }

    if (root.contains("inference")) {
      const json& i = root["inference"];
      check_keys(i, "inference", {"T", "mode", "seed"});
      read(i, "T", c.passes);
      if (i.contains("mode")) c.mode = hierarchy::parse_routing_mode(i["mode"].get<std::string>());
      read(i, "seed", c.mc_seed);
    }

    c.out_dir = resolve(base, c.out_dir.string());
    if (root.contains("output")) {
      check_keys(root["output"], "output", {"dir"});
      if (root["output"].contains("dir")) c.out_dir = resolve(base, root["output"]["dir"].get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json config_to_json(const RunConfig& c) {
  json counts = json::object();
  for (auto label : data::kSubtypes) counts[std::string(data::to_string(label))] = c.synthetic.counts[data::index_of(label)];
  json backbone = nullptr;
  if (c.backbone) {
    backbone = json::array();
    for (const auto& l : *c.backbone) backbone.push_back(nn::to_json(l));
  }
  return {
      {"dataset",
       {{"manifest", c.manifest_path().string()},
        {"target_size", {c.height, c.width}},
        {"split",
         {{"train_fraction", c.split.train_fraction},
          {"seed", c.split.seed},
          {"grouping", data::to_string(c.split.grouping)}}},
        {"synthetic",
         {{"counts", counts},
          {"size", c.synthetic.size},
          {"noise", c.synthetic.noise},
          {"seed", c.synthetic.seed},
          {"images_per_patient", c.synthetic.images_per_patient},
          {"dir", c.synthetic.dir.string()}}}}},
      {"model", {{"backbone", backbone}, {"classifier_widths", c.classifier_widths}, {"dropout", c.dropout}}},
      {"training",
       {{"lr", c.stage1.lr},
        {"batch_size", c.stage1.batch_size},
        {"reg", c.stage1.reg},
        {"l2_scope", c.stage1.l2_scope == nn::L2Scope::all ? "all" : "classifier"},
        {"epochs", {{"stage1", c.stage1.epochs}, {"stage2", c.stage2.epochs}}},
        {"seeds", {{"stage1", c.stage1.seed}, {"stage2", c.stage2.seed}}},
        {"augment", c.augment ? hierarchy::augment_config_to_json(*c.augment) : json(nullptr)},
        {"adasyn_k", c.adasyn_k}}},
      {"inference", {{"T", c.passes}, {"mode", hierarchy::to_string(c.mode)}, {"seed", c.mc_seed}}},
      {"output", {{"dir", c.out_dir.string()}}}};
}

}  // namespace hmc::cli
