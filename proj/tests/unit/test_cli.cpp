#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <gtest/gtest.h>

#include "hmc/cli/commands.hpp"
#include "hmc/cli/synthetic.hpp"
#include "hmc/core/error.hpp"

using namespace hmc;
using namespace hmc::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("hmc_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig small_run(const fs::path& root) {
  nlohmann::json j = {
      {"dataset",
       {{"target_size", {16, 16}},
        {"split", {{"seed", 3}}},
        {"synthetic", {{"counts", {{"TN", 20}, {"Luminal", 60}, {"HER2", 24}}}, {"size", 16}, {"noise", 0.1}, {"dir", "data"}}}}},
      {"model", {{"classifier_widths", {32, 32}}}},
      {"training", {{"epochs", {{"stage1", 4}, {"stage2", 5}}}, {"lr", 1e-3}}},
      {"inference", {{"T", 5}}},
      {"output", {{"dir", "run"}}}};
  return config_from_json(j, root);
}

}  // namespace

TEST(Config, DefaultsMirrorPublishedSetup) {
  RunConfig c = config_from_json(nlohmann::json::object());
  EXPECT_EQ(c.stage1.lr, 1e-4);
  EXPECT_EQ(c.stage1.batch_size, 32u);
  EXPECT_EQ(c.stage1.reg, 1e-6);
  EXPECT_EQ(c.stage1.epochs, 55u);
  EXPECT_EQ(c.stage2.epochs, 75u);
  ASSERT_TRUE(c.augment.has_value());
  EXPECT_EQ(c.augment->max_rotation_deg, 90.0);
  EXPECT_EQ(c.height, 224u);
  EXPECT_EQ(c.split.train_fraction, 0.8);
  EXPECT_EQ(c.passes, 50u);
  EXPECT_EQ(c.mode, hierarchy::RoutingMode::soft);
  EXPECT_EQ(c.stage_network().n_classes(), 2u);
}

TEST(Config, RejectsUnknownKeysAndBadRanges) {
  EXPECT_THROW(config_from_json({{"training", {{"learning_rate", 0.1}}}}), ValidationError);
  EXPECT_THROW(config_from_json({{"inference", {{"T", 0}}}}), ValidationError);
  EXPECT_THROW(config_from_json({{"inference", {{"mode", "sideways"}}}}), ValidationError);
  EXPECT_THROW(config_from_json({{"dataset", {{"split", {{"train_fraction", 1.5}}}}}}), ValidationError);
  EXPECT_THROW(config_from_json({{"training", {{"augment", {{"max_rotation_deg", 200}}}}}}), ValidationError);
}

TEST(Config, RoundTripsAndResolvesPaths) {
  RunConfig c = small_run("/base");
  EXPECT_EQ(c.synthetic.dir, fs::path("/base/data"));
  EXPECT_EQ(c.manifest_path(), fs::path("/base/data/manifest.csv"));
  EXPECT_EQ(c.out_dir, fs::path("/base/run"));
  RunConfig again = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));
}

TEST(Synthetic, CountsAndByteReproducibility) {
  SyntheticConfig syn;
  syn.counts = {40, 200, 60};
  syn.size = 16;
  syn.seed = 7;
  auto a = scratch("syn_a"), b = scratch("syn_b");
  data::Dataset da = generate_synthetic(syn, a);
  generate_synthetic(syn, b);
  EXPECT_EQ(da.size(), 300u);
  EXPECT_EQ(da.count(data::SubtypeLabel::luminal), 200u);
  EXPECT_EQ(slurp(a / "manifest.csv"), slurp(b / "manifest.csv"));
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a / "images")) {
    ++files;
    EXPECT_EQ(slurp(entry.path()), slurp(b / "images" / entry.path().filename())) << entry.path();
  }
  EXPECT_EQ(files, 300u);
  data::Dataset loaded = data::load_manifest(a / "manifest.csv");
  EXPECT_EQ(loaded.counts(), da.counts());
}

TEST(Synthetic, ZeroNoiseRecoversTemplates) {
  for (auto label : data::kSubtypes) {
    data::Image t = synthetic_template(label, 16);
    EXPECT_EQ(synthetic_image(label, 16, 0.0, 123).pixels, t.pixels);
  }
  EXPECT_NE(synthetic_template(data::SubtypeLabel::luminal, 16).pixels,
            synthetic_template(data::SubtypeLabel::her2_enriched, 16).pixels);
}

TEST(Synthetic, NearestNeighbourSeparatesClassesAtLowNoise) {
  std::vector<nn::Tensor> x;
  std::vector<std::size_t> y;
  for (std::size_t i = 0; i < 150; ++i) {
    auto label = data::subtype_at(i % 3);
    x.push_back(data::preprocess(synthetic_image(label, 16, 0.1, 1000 + i), 16, 16));
    y.push_back(i % 3);
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double best = 1e300;
    std::size_t guess = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (i == j) continue;
      double d = 0.0;
      for (std::size_t k = 0; k < x[i].size(); ++k) d += (x[i][k] - x[j][k]) * (x[i][k] - x[j][k]);
      if (d < best) {
        best = d;
        guess = y[j];
      }
    }
    correct += guess == y[i];
  }
  EXPECT_GE(static_cast<double>(correct) / x.size(), 0.95);
}

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(scratch("pipeline"));
    RunConfig c = small_run(*root_);
    cmd_gen_synthetic(c);
    cmd_train(c);
  }
  static void TearDownTestSuite() { delete root_; }
  static fs::path* root_;
};

fs::path* Pipeline::root_ = nullptr;

TEST_F(Pipeline, TrainLogRecordsConfiguredEpochs) {
  auto log = nlohmann::json::parse(slurp(*root_ / "run" / "train_log.json"));
  EXPECT_EQ(log["stage1"]["loss_history"].size(), 4u);
  EXPECT_EQ(log["stage2"]["loss_history"].size(), 5u);
  EXPECT_EQ(log["stage1"]["counts_before_rebalance"], log["split"]["train"]);
  for (const char* f : {"stage1.spec.json", "stage1.params.bin", "stage2.spec.json", "stage2.params.bin", "meta.json"})
    EXPECT_TRUE(fs::exists(*root_ / "run" / "model" / f)) << f;
}

TEST_F(Pipeline, RetrainingIsByteIdentical) {
  RunConfig c = small_run(*root_);
  Overrides ov;
  ov.out = *root_ / "rerun";
  cmd_train(c, ov);
  for (const char* f : {"stage1.params.bin", "stage2.params.bin", "meta.json", "stage1.spec.json"})
    EXPECT_EQ(slurp(*root_ / "run" / "model" / f), slurp(*root_ / "rerun" / "model" / f)) << f;
}

TEST_F(Pipeline, EvalChangesOnlyTheUncertaintyReportWithT) {
  RunConfig c = small_run(*root_);
  Overrides one, many;
  one.model = many.model = *root_ / "run" / "model";
  one.out = *root_ / "t1";
  one.passes = 1;
  many.out = *root_ / "t50";
  many.passes = 50;
  cmd_eval(c, one);
  cmd_eval(c, many);
  const fs::path a = *root_ / "t1" / "eval", b = *root_ / "t50" / "eval";
  EXPECT_EQ(slurp(a / "metrics_without_uq.json"), slurp(b / "metrics_without_uq.json"));
  EXPECT_EQ(slurp(a / "confusion_without_uq.csv"), slurp(b / "confusion_without_uq.csv"));
  EXPECT_NE(slurp(a / "metrics_with_uq.json"), slurp(b / "metrics_with_uq.json"));
  for (const char* cls : {"TN", "Luminal", "HER2"})
    EXPECT_TRUE(fs::exists(a / (std::string("roc_with_uq_") + cls + ".csv"))) << cls;
}

TEST_F(Pipeline, PredictTnImageIsConfidentAndRepeatable) {
  const fs::path model = *root_ / "run" / "model";
  const fs::path img = *root_ / "tn.pgm";
  data::write_pgm(img, synthetic_image(data::SubtypeLabel::triple_negative, 16, 0.02, 99));
  auto first = cmd_predict(model, img);
  EXPECT_EQ(first["T"], 50);
  EXPECT_EQ(first["label"], "TN");
  EXPECT_EQ(first.dump(), cmd_predict(model, img).dump());

  std::vector<double> entropies;
  data::Dataset all = data::load_manifest(*root_ / "data" / "manifest.csv");
  for (const auto& r : all.records()) entropies.push_back(cmd_predict(model, r.image, 10)["composed_entropy"]);
  std::nth_element(entropies.begin(), entropies.begin() + entropies.size() / 2, entropies.end());
  EXPECT_LT(first["composed_entropy"].get<double>(), entropies[entropies.size() / 2]);
}

TEST_F(Pipeline, EvalRejectsMismatchedInputSize) {
  RunConfig c = small_run(*root_);
  c.height = c.width = 20;
  Overrides ov;
  ov.model = *root_ / "run" / "model";
  ov.out = *root_ / "mismatch";
  EXPECT_THROW(cmd_eval(c, ov), ValidationError);
}

namespace {

int run(const std::string& args) {
  const int status = std::system((std::string(HMC_BINARY) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Binary, ExitCodes) {
  fs::path root = scratch("exit");
  fs::create_directories(root / "data");
  data::Image img = synthetic_template(data::SubtypeLabel::luminal, 16);
  for (int i = 0; i < 4; ++i) data::write_pgm(root / "data" / ("l" + std::to_string(i) + ".pgm"), img);
  std::ofstream(root / "data" / "manifest.csv") << "image,patient_id,view,label\n"
                                                   "l0.pgm,a,CC,Luminal\nl1.pgm,b,CC,Luminal\n"
                                                   "l2.pgm,c,CC,TN\nl3.pgm,d,CC,TN\n";
  std::ofstream(root / "cfg.json") << R"({"dataset": {"manifest": "data/manifest.csv", "target_size": [16, 16]},
                                         "training": {"epochs": {"stage1": 1, "stage2": 1}}})";
  EXPECT_EQ(run("train --config " + (root / "cfg.json").string() + " --out " + (root / "run").string()), 2);
  std::ofstream(root / "bad.json") << R"({"inference": {"T": 0}})";
  EXPECT_EQ(run("eval --config " + (root / "bad.json").string()), 2);
  EXPECT_EQ(run("predict --model " + (root / "nowhere").string() + " --image " + (root / "data" / "l0.pgm").string()), 1);
  EXPECT_EQ(run("frobnicate"), 2);
  std::ofstream(root / "bad_manifest.json") << R"({"dataset": {"manifest": "missing.csv"}})";
  EXPECT_EQ(run("train --config " + (root / "bad_manifest.json").string()), 1);
}
