#include "md2ga/data.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;
using md2ga::Dataset;
using md2ga::gen_synthetic;
using md2ga::SyntheticConfig;

namespace {

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "md2ga_data_test";
  fs::create_directories(dir);
  return dir;
}

SyntheticConfig small_cfg() {
  SyntheticConfig cfg;
  cfg.joints = 3;
  cfg.dims = 2;
  cfg.t_p = 4;
  cfg.t_f = 5;
  cfg.count = 7;
  cfg.seed = 99;
  return cfg;
}

}  // namespace

TEST(Generator, DeterministicPerSeed) {
  auto a = gen_synthetic(small_cfg());
  auto b = gen_synthetic(small_cfg());
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(a.sequences[i].coords, b.sequences[i].coords);
  auto cfg2 = small_cfg();
  cfg2.seed = 100;
  auto c = gen_synthetic(cfg2);
  EXPECT_NE(a.sequences[0].coords, c.sequences[0].coords);
}

TEST(Generator, ZeroAmplitudeZeroNoiseIsConstantInTime) {
  auto cfg = small_cfg();
  cfg.amp_lo = cfg.amp_hi = 0.0;
  cfg.noise_std = 0.0;
  auto ds = gen_synthetic(cfg);
  for (const auto& seq : ds.sequences)
    for (int t = 1; t < seq.frames; ++t)
      for (int j = 0; j < seq.joints; ++j)
        for (int d = 0; d < seq.dims; ++d)
          EXPECT_DOUBLE_EQ(seq.at(t, j, d), seq.at(0, j, d));
}

TEST(Generator, OneClassNoNoiseDiffersOnlyByPhaseShift) {
  auto cfg = small_cfg();
  cfg.num_classes = 1;
  cfg.noise_std = 0.0;
  cfg.count = 3;
  auto ds = gen_synthetic(cfg);
  // all sequences share amplitude/offset structure: equal time-means per
  // channel would be too loose; instead verify each sequence fits the same
  // sinusoid family by checking the alternative phase reproduces it
  for (int label : ds.labels) EXPECT_EQ(label, 0);
  // distinct sequences really are phase-shifted, not identical
  EXPECT_NE(ds.sequences[0].coords, ds.sequences[1].coords);
  // constant offset recoverable: a full-period average is phase-invariant;
  // here we settle for all values finite and bounded by amp+|offset|
  for (const auto& seq : ds.sequences)
    for (double v : seq.coords) EXPECT_LE(std::abs(v), cfg.amp_hi + 1.0 + 1e-12);
}

TEST(Generator, LabelsCycleThroughClasses) {
  auto cfg = small_cfg();
  cfg.num_classes = 3;
  cfg.count = 7;
  auto ds = gen_synthetic(cfg);
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 2, 0, 1, 2, 0}));
}

TEST(CsvRoundTrip, BitExact) {
  auto ds = gen_synthetic(small_cfg());
  auto path = temp_dir() / "roundtrip.csv";
  save_csv(ds, path);
  auto back = md2ga::load_csv(path);
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_EQ(back.t_p, ds.t_p);
  EXPECT_EQ(back.t_f, ds.t_f);
  EXPECT_EQ(back.labels, ds.labels);
  for (size_t i = 0; i < ds.size(); ++i)
    EXPECT_EQ(back.sequences[i].coords, ds.sequences[i].coords);  // bitwise
}

TEST(CsvRoundTrip, AwkwardDoublesSurvive) {
  Dataset ds;
  ds.t_p = 1;
  ds.t_f = 1;
  ds.joints = 1;
  ds.dims = 3;
  auto seq = md2ga::MotionSequence::zeros(2, 1, 3);
  seq.coords = {0.1, 1.0 / 3.0, 1e-300, -0.0, 6.02214076e23, std::nextafter(1.0, 2.0)};
  ds.sequences.push_back(seq);
  ds.labels.push_back(0);
  auto path = temp_dir() / "awkward.csv";
  save_csv(ds, path);
  auto back = md2ga::load_csv(path);
  for (size_t i = 0; i < seq.coords.size(); ++i) {
    EXPECT_EQ(back.sequences[0].coords[i], seq.coords[i]);
    // -0.0 must keep its sign bit too
    EXPECT_EQ(std::signbit(back.sequences[0].coords[i]), std::signbit(seq.coords[i]));
  }
}

TEST(CsvRoundTrip, EmptyDatasetIsValid) {
  Dataset ds;
  ds.t_p = 4;
  ds.t_f = 5;
  ds.joints = 3;
  ds.dims = 2;
  auto path = temp_dir() / "empty.csv";
  save_csv(ds, path);
  auto back = md2ga::load_csv(path);
  EXPECT_EQ(back.size(), 0u);
  EXPECT_EQ(back.t_p, 4);
}

TEST(CsvLoad, TruncatedFileIsRejectedWithContext) {
  auto ds = gen_synthetic(small_cfg());
  auto path = temp_dir() / "trunc.csv";
  save_csv(ds, path);
  // drop the last line but keep the manifest's count: must not silently load
  auto text = md2ga::read_file(path);
  auto cut = text.rfind('\n', text.size() - 2);
  md2ga::write_file_atomic(path, text.substr(0, cut + 1));
  try {
    md2ga::load_csv(path);
    FAIL() << "expected failure on truncated csv";
  } catch (const std::runtime_error& e) {
    // checksum guard fires first; the message must name the file
    EXPECT_NE(std::string(e.what()).find("trunc.csv"), std::string::npos);
  }
}

TEST(CsvLoad, MalformedRowNamesLineNumber) {
  Dataset ds;
  ds.t_p = 1;
  ds.t_f = 1;
  ds.joints = 1;
  ds.dims = 2;
  ds.sequences.push_back(md2ga::MotionSequence::zeros(2, 1, 2));
  ds.labels.push_back(0);
  auto path = temp_dir() / "mangled.csv";
  save_csv(ds, path);
  auto text = md2ga::read_file(path);
  auto mangled = text;
  mangled.replace(mangled.find("0,1,0"), 5, "0,1,x");
  md2ga::write_file_atomic(path, mangled);
  // fix the sidecar checksum so the parser itself is what trips
  auto manifest = nlohmann::json::parse(md2ga::read_file(path.string() + ".json"));
  manifest["csv_checksum_fnv1a64"] = md2ga::fnv1a64(mangled);
  md2ga::write_file_atomic(path.string() + ".json", manifest.dump(2) + "\n");
  try {
    md2ga::load_csv(path);
    FAIL() << "expected parse error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(Split, DisjointExhaustiveAndSeeded) {
  auto cfg = small_cfg();
  cfg.count = 23;
  auto ds = gen_synthetic(cfg);
  auto [train, val, test] = md2ga::split(ds, 0.6, 0.2, 0.2, 7);
  EXPECT_EQ(train.size() + val.size() + test.size(), ds.size());
  // multiset equality via sorted flattened first-values
  auto key = [](const Dataset& d) {
    std::vector<double> v;
    for (const auto& s : d.sequences) v.push_back(s.coords[0]);
    std::sort(v.begin(), v.end());
    return v;
  };
  std::vector<double> all = key(train);
  for (const auto& part : {val, test}) {
    auto k = key(part);
    all.insert(all.end(), k.begin(), k.end());
  }
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, key(ds));

  auto [train2, val2, test2] = md2ga::split(ds, 0.6, 0.2, 0.2, 7);
  EXPECT_EQ(train.sequences[0].coords, train2.sequences[0].coords);
  EXPECT_EQ(val.size(), val2.size());

  auto [all_train, no_val, no_test] = md2ga::split(ds, 1.0, 0.0, 0.0, 7);
  EXPECT_EQ(all_train.size(), ds.size());
  EXPECT_EQ(no_val.size(), 0u);
  EXPECT_EQ(no_test.size(), 0u);

  EXPECT_THROW(md2ga::split(ds, 0.5, 0.2, 0.2, 7), std::invalid_argument);
}

TEST(ZeroVelocity, RepeatsLastHistoryFrame) {
  auto ds = gen_synthetic(small_cfg());
  auto hist = ds.history(0);
  auto pred = md2ga::zero_velocity_baseline(hist, 5);
  EXPECT_EQ(pred.frames, 5);
  for (int t = 0; t < 5; ++t)
    for (int j = 0; j < 3; ++j)
      for (int d = 0; d < 2; ++d)
        EXPECT_DOUBLE_EQ(pred.at(t, j, d), hist.at(3, j, d));
}
