#include "hmc/cli/commands.hpp"

#include <fstream>

#include "hmc/cli/synthetic.hpp"
#include "hmc/core/error.hpp"
#include "hmc/data/image.hpp"

namespace hmc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename F>
auto in_step(const std::string& step, F&& f) {
  try {
    return f();
  } catch (const IoError& e) {
    throw IoError(step + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(step + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(step + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

json counts_json(const data::Dataset& ds) {
  json o = json::object();
  for (auto label : data::kSubtypes) o[std::string(data::to_string(label))] = ds.count(label);
  return o;
}

data::SplitResult split_from_config(const RunConfig& config) {
  const fs::path manifest = config.manifest_path();
  data::Dataset all = in_step("manifest", [&] { return data::load_manifest(manifest); });
  return in_step("split", [&] { return data::split(all, config.split); });
}

}  // namespace

fs::path model_dir(const RunConfig& config, const Overrides& overrides) {
  if (overrides.model) return *overrides.model;
  return overrides.out.value_or(config.out_dir) / "model";
}

json cmd_gen_synthetic(const RunConfig& config, const Overrides& overrides) {
  SyntheticConfig syn = config.synthetic;
  if (overrides.seed) syn.seed = *overrides.seed;
  const fs::path dir = overrides.out.value_or(syn.dir);
  data::Dataset ds = in_step("gen-synthetic", [&] { return generate_synthetic(syn, dir); });
  return {{"manifest", (dir / "manifest.csv").string()}, {"images", ds.size()}, {"counts", counts_json(ds)}};
}

json cmd_train(const RunConfig& base, const Overrides& overrides) {
  RunConfig config = base;
  if (overrides.seed) {
    config.stage1.seed = *overrides.seed;
    config.stage2.seed = *overrides.seed + 1;
  }
  const fs::path out = overrides.out.value_or(config.out_dir);
  data::SplitResult parts = split_from_config(config);
  data::Dataset train = in_step("preprocess", [&] { return data::materialize(parts.train, config.height, config.width); });
  hierarchy::TwoStageModel model = in_step("train", [&] {
    return hierarchy::train_two_stage(train, config.stage_config(1), config.stage_config(2));
  });
  const fs::path dir = model_dir(config, overrides);
  make_dir(out);
  hierarchy::save_model(model, dir);

  json log{{"config", config_to_json(config)},
           {"split", {{"train", counts_json(parts.train)}, {"test", counts_json(parts.test)}, {"warnings", parts.warnings}}},
           {"seeds",
            {{"split", config.split.seed}, {"stage1", config.stage1.seed}, {"stage2", config.stage2.seed}}},
           {"stage1", hierarchy::to_json(model.stage1.meta)},
           {"stage2", hierarchy::to_json(model.stage2.meta)}};
  write_text(out / "train_log.json", log.dump(2) + "\n");
  return {{"model", dir.string()},
          {"log", (out / "train_log.json").string()},
          {"stage1_train_accuracy", model.stage1.meta.train_accuracy},
          {"stage2_train_accuracy", model.stage2.meta.train_accuracy}};
}

data::Dataset load_test_split(const RunConfig& config) {
  data::SplitResult parts = split_from_config(config);
  return in_step("preprocess", [&] { return data::materialize(parts.test, config.height, config.width); });
}

EvalOutputs cmd_eval(const RunConfig& base, const Overrides& overrides) {
  RunConfig config = base;
  if (overrides.seed) config.mc_seed = *overrides.seed;
  if (overrides.passes) config.passes = *overrides.passes;
  if (overrides.mode) config.mode = *overrides.mode;
  const hierarchy::TwoStageModel model = in_step("load model", [&] { return hierarchy::load_model(model_dir(config, overrides)); });
  for (const auto* stage : {&model.stage1, &model.stage2})
    if (stage->spec.input_shape() != config.input_shape())
      throw ValidationError("model input " + nn::shape_string(stage->spec.input_shape()) +
                            " does not match the configured target size " + nn::shape_string(config.input_shape()));
  const data::Dataset test = load_test_split(config);

  EvalOutputs out{in_step("evaluate without UQ", [&] { return metrics::evaluate(model, test, std::nullopt, config.mode); }),
                  in_step("evaluate with UQ", [&] {
                    return metrics::evaluate(model, test, mc::MCConfig{config.passes, config.mc_seed, false}, config.mode);
                  })};

  const fs::path dir = overrides.out.value_or(config.out_dir) / "eval";
  make_dir(dir);
  for (auto [name, ev] : {std::pair{"without_uq", &out.without_uq}, std::pair{"with_uq", &out.with_uq}}) {
    const std::string tag(name);
    write_text(dir / ("metrics_" + tag + ".json"), metrics::to_json(*ev).dump(2) + "\n");
    write_text(dir / ("confusion_" + tag + ".csv"), metrics::confusion_to_csv(ev->report.matrix));
    for (auto label : data::kSubtypes) {
      const auto& roc = ev->report.per_class[data::index_of(label)].roc;
      if (roc) write_text(dir / ("roc_" + tag + "_" + std::string(data::to_string(label)) + ".csv"), metrics::roc_to_csv(*roc));
    }
  }
  return out;
}

json cmd_predict(const fs::path& dir, const fs::path& image, std::size_t passes, hierarchy::RoutingMode mode,
                 std::uint64_t seed) {
  const hierarchy::TwoStageModel model = in_step("load model", [&] { return hierarchy::load_model(dir); });
  const nn::Shape& shape = model.stage1.spec.input_shape();
  if (shape.size() != 3) throw ValidationError("model does not take image input");
  const nn::Tensor x = in_step("image", [&] { return data::preprocess(data::read_image(image), shape[0], shape[1]); });
  json j = hierarchy::to_json(hierarchy::predict(model, x, mc::MCConfig{passes, seed, false}, mode));
  j["mode"] = hierarchy::to_string(mode);
  j["image"] = image.string();
  return j;
}

}  // namespace hmc::cli
