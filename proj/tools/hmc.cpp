// hmc: synthetic data generation, two-stage training, evaluation and
// single-image prediction with MC-dropout uncertainty.

#include <iostream>

#include <CLI11.hpp>

#include "hmc/cli/commands.hpp"
#include "hmc/core/error.hpp"

namespace {

enum ExitCode { kOk = 0, kIo = 1, kValidation = 2, kNumeric = 3 };

hmc::cli::RunConfig config_or_default(const std::string& path) {
  return path.empty() ? hmc::cli::config_from_json(nlohmann::json::object()) : hmc::cli::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical breast-cancer subtype classifier with MC-dropout uncertainty"};
  app.require_subcommand(1);

  std::string config_path, model, image, out, mode;
  std::uint64_t seed = 0;
  std::size_t passes = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--seed", seed, "Seed override");
  };
  CLI::App* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic 3-class image set and manifest");
  add_common(gen);
  CLI::App* train = app.add_subcommand("train", "Train both stages and save the model");
  add_common(train);
  CLI::App* eval = app.add_subcommand("eval", "Score the test split with and without MC dropout");
  add_common(eval);
  eval->add_option("--model", model, "Model directory (default <out>/model)");
  eval->add_option("--T", passes, "MC dropout forward passes")->check(CLI::PositiveNumber);
  eval->add_option("--mode", mode, "Routing mode")->check(CLI::IsMember({"soft", "hard"}));
  CLI::App* predict = app.add_subcommand("predict", "Predict one image and print JSON");
  add_common(predict);
  predict->add_option("--model", model, "Model directory (default <out>/model)");
  predict->add_option("--image", image, "Image file (PNG or PGM)")->required();
  predict->add_option("--T", passes, "MC dropout forward passes")->check(CLI::PositiveNumber);
  predict->add_option("--mode", mode, "Routing mode")->check(CLI::IsMember({"soft", "hard"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  auto given = [](const CLI::App* cmd, const char* name) { return cmd->count(name) > 0; };
  try {
    const CLI::App* cmd = app.get_subcommands().front();
    const hmc::cli::RunConfig config = config_or_default(config_path);
    hmc::cli::Overrides ov;
    if (given(cmd, "--out")) ov.out = out;
    if (given(cmd, "--seed")) ov.seed = seed;
    if (cmd != gen && cmd != train) {
      if (given(cmd, "--model")) ov.model = model;
      if (given(cmd, "--T")) ov.passes = passes;
      if (given(cmd, "--mode")) ov.mode = hmc::hierarchy::parse_routing_mode(mode);
    }

    if (cmd == gen) {
      std::cout << hmc::cli::cmd_gen_synthetic(config, ov).dump(2) << "\n";
    } else if (cmd == train) {
      std::cout << hmc::cli::cmd_train(config, ov).dump(2) << "\n";
    } else if (cmd == eval) {
      auto result = hmc::cli::cmd_eval(config, ov);
      nlohmann::json summary;
      for (auto [name, ev] : {std::pair{"without_uq", &result.without_uq}, std::pair{"with_uq", &result.with_uq}})
        summary[name] = {{"accuracy", ev->report.accuracy},
                         {"macro_auc", ev->report.macro_auc ? nlohmann::json(*ev->report.macro_auc) : nlohmann::json(nullptr)},
                         {"mean_composed_entropy", ev->mean_composed_entropy}};
      std::cout << summary.dump(2) << "\n";
    } else {
      std::cout << hmc::cli::cmd_predict(hmc::cli::model_dir(config, ov), image, ov.passes.value_or(config.passes),
                                         ov.mode.value_or(config.mode), ov.seed.value_or(config.mc_seed))
                       .dump(2)
                << "\n";
    }
    return kOk;
  } catch (const hmc::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const hmc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const hmc::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
}
