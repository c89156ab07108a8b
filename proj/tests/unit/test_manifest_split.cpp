#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "hmc/core/error.hpp"
#include "hmc/data/dataset.hpp"
#include "hmc/data/image.hpp"

using namespace hmc::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("hmc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void tiny_pgm(const fs::path& path, std::uint16_t value = 7) {
  Image img{2, 2, 1, 8, {value, value, value, value}};
  write_pgm(path, img);
}

SampleRecord record(std::string image, std::string patient, SubtypeLabel label) {
  SampleRecord r;
  r.image = std::move(image);
  r.patient_id = std::move(patient);
  r.label = label;
  return r;
}

}  // namespace

TEST(Manifest, LoadsFourRows) {
  auto dir = scratch("manifest4");
  for (int i = 0; i < 4; ++i) tiny_pgm(dir / ("img" + std::to_string(i) + ".pgm"));
  std::ofstream(dir / "m.csv") << "image,patient_id,view,label\n"
                                  "img0.pgm,p1,CC,TN\nimg1.pgm,p1,MLO,TN\n"
                                  "img2.pgm,p2,CC,Luminal\nimg3.pgm,p3,,HER2\n";
  Dataset ds = load_manifest(dir / "m.csv");
  ASSERT_EQ(ds.size(), 4u);
  EXPECT_EQ(ds.count(SubtypeLabel::triple_negative), 2u);
  EXPECT_EQ(ds.count(SubtypeLabel::luminal), 1u);
  EXPECT_EQ(ds.count(SubtypeLabel::her2_enriched), 1u);
  EXPECT_EQ(ds[1].view, View::mlo);
  EXPECT_EQ(ds[3].view, View::unknown);
  EXPECT_EQ(fs::path(ds[0].image), dir / "img0.pgm");
}

TEST(Manifest, UnknownLabelNamesRow) {
  auto dir = scratch("manifest_bad");
  tiny_pgm(dir / "a.pgm");
  tiny_pgm(dir / "b.pgm");
  std::ofstream(dir / "m.csv") << "image,patient_id,view,label\na.pgm,p1,CC,TN\nb.pgm,p2,CC,LuminalC\n";
  try {
    load_manifest(dir / "m.csv");
    FAIL() << "expected a validation error";
  } catch (const hmc::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(Manifest, MissingFileAndUnreadableImage) {
  auto dir = scratch("manifest_io");
  EXPECT_THROW(load_manifest(dir / "absent.csv"), hmc::IoError);
  std::ofstream(dir / "m.csv") << "image,patient_id,view,label\nnope.pgm,p1,CC,TN\n";
  try {
    load_manifest(dir / "m.csv");
    FAIL();
  } catch (const hmc::IoError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
}

TEST(Manifest, RejectsDuplicatePatientImage) {
  auto dir = scratch("manifest_dup");
  tiny_pgm(dir / "a.pgm");
  std::ofstream(dir / "m.csv") << "image,patient_id,view,label\na.pgm,p1,CC,TN\na.pgm,p1,CC,TN\n";
  EXPECT_THROW(load_manifest(dir / "m.csv"), hmc::ValidationError);
}

TEST(Manifest, CohortScaleCountsPreserved) {
  auto dir = scratch("manifest_cohort");
  tiny_pgm(dir / "cc.pgm");
  tiny_pgm(dir / "mlo.pgm");
  {
    std::ofstream out(dir / "m.csv");
    out << "image,patient_id,view,label\n";
    for (int p = 0; p < 749; ++p) {
      const char* label = p % 3 == 0 ? "TN" : p % 3 == 1 ? "Luminal" : "HER2";
      out << "cc.pgm,patient" << p << ",CC," << label << '\n';
      out << "mlo.pgm,patient" << p << ",MLO," << label << '\n';
    }
  }
  Dataset ds = load_manifest(dir / "m.csv");
  EXPECT_EQ(ds.size(), 1498u);
  std::set<std::string> patients;
  for (const auto& r : ds.records()) patients.insert(r.patient_id);
  EXPECT_EQ(patients.size(), 749u);
  EXPECT_EQ(ds.count(SubtypeLabel::triple_negative) + ds.count(SubtypeLabel::luminal) +
                ds.count(SubtypeLabel::her2_enriched),
            1498u);
}

TEST(Manifest, WriteThenLoadRoundTrips) {
  auto dir = scratch("manifest_rt");
  tiny_pgm(dir / "a.pgm");
  tiny_pgm(dir / "b.pgm");
  Dataset ds;
  ds.add(record((dir / "a.pgm").string(), "p1", SubtypeLabel::her2_enriched));
  ds.add(record((dir / "b.pgm").string(), "p2", SubtypeLabel::luminal));
  write_manifest(dir / "m.csv", ds);
  Dataset back = load_manifest(dir / "m.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].label, SubtypeLabel::her2_enriched);
  EXPECT_EQ(back[1].patient_id, "p2");
}

namespace {

Dataset cohort(std::size_t patients, std::size_t images_per_patient) {
  Dataset ds;
  for (std::size_t p = 0; p < patients; ++p)
    for (std::size_t v = 0; v < images_per_patient; ++v)
      ds.add(record("img" + std::to_string(p) + "_" + std::to_string(v), "p" + std::to_string(p),
                    subtype_at(p % 3)));
  return ds;
}

std::set<std::string> patients_of(const Dataset& ds) {
  std::set<std::string> out;
  for (const auto& r : ds.records()) out.insert(r.patient_id);
  return out;
}

}  // namespace

TEST(Split, TenPatientsGiveEightAndTwo) {
  Dataset ds;
  for (int p = 0; p < 10; ++p) ds.add(record("i" + std::to_string(p), "p" + std::to_string(p), SubtypeLabel::luminal));
  auto s = split(ds, {0.8, 3, Grouping::by_patient});
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
}

TEST(Split, SameSeedSamePartition) {
  Dataset ds = cohort(40, 2);
  auto a = split(ds, {0.8, 11, Grouping::by_patient});
  auto b = split(ds, {0.8, 11, Grouping::by_patient});
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train[i].image, b.train[i].image);
  auto c = split(ds, {0.8, 12, Grouping::by_patient});
  bool differs = false;
  for (std::size_t i = 0; i < std::min(a.train.size(), c.train.size()); ++i)
    differs |= a.train[i].image != c.train[i].image;
  EXPECT_TRUE(differs);
}

TEST(Split, PatientsNeverSpanBothSides) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Dataset ds = cohort(31, 2);
    auto s = split(ds, {0.8, seed, Grouping::by_patient});
    EXPECT_EQ(s.train.size() + s.test.size(), ds.size());
    auto tr = patients_of(s.train), te = patients_of(s.test);
    for (const auto& p : tr) EXPECT_EQ(te.count(p), 0u) << p;
    std::set<std::string> images;
    for (const auto* side : {&s.train, &s.test})
      for (const auto& r : side->records()) images.insert(r.image);
    EXPECT_EQ(images.size(), ds.size());
    for (auto label : kSubtypes) {
      EXPECT_GT(s.train.count(label), 0u);
      EXPECT_GT(s.test.count(label), 0u);
    }
  }
}

TEST(Split, ByImageCountsImages) {
  Dataset ds;
  for (int i = 0; i < 10; ++i)
    ds.add(record("i" + std::to_string(i), "p" + std::to_string(i / 2),
                  i % 2 ? SubtypeLabel::luminal : SubtypeLabel::triple_negative));
  auto s = split(ds, {0.8, 1, Grouping::by_image});
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
}

TEST(Split, SingletonClassWarns) {
  Dataset ds = cohort(6, 1);
  ds.add(record("lonely", "px", SubtypeLabel::triple_negative));
  Dataset only_one;
  for (const auto& r : ds.records())
    if (r.label != SubtypeLabel::her2_enriched) only_one.add(r);
  only_one.add(record("h", "ph", SubtypeLabel::her2_enriched));
  auto s = split(only_one, {0.8, 2, Grouping::by_patient});
  EXPECT_FALSE(s.warnings.empty());
}

TEST(Split, RejectsBadFractionAndGeneratedRecords) {
  Dataset ds = cohort(6, 1);
  EXPECT_THROW(split(ds, {1.0, 0, Grouping::by_patient}), hmc::ValidationError);
  EXPECT_THROW(split(ds, {0.0, 0, Grouping::by_patient}), hmc::ValidationError);
  auto synth = record("s", "ps", SubtypeLabel::triple_negative);
  synth.synthetic = true;
  ds.add(synth);
  EXPECT_THROW(split(ds, {0.8, 0, Grouping::by_patient}), hmc::ValidationError);
}
