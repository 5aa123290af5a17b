#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "socdfn/dataset.hpp"
#include "socdfn/rng.hpp"

namespace socdfn {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("socdfn_dataset_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

Dataset make_dataset(std::size_t n, std::uint64_t seed = 1) {
  Rng rng(seed);
  Dataset d{"synthetic", {}};
  for (std::size_t i = 0; i < n; ++i)
    d.records.push_back({static_cast<double>(i), rng.uniform(3.0, 4.2), rng.uniform(-3, 1), rng.uniform(20, 30),
                         rng.uniform(0, 100)});
  return d;
}

using LoadCsv = TempDir;

TEST_F(LoadCsv, ReadsWellFormedRows) {
  const auto p = write("ok.csv", "t_s,voltage_v,current_a,temp_c,soc_pct\n0,4.1,-1.5,25,99.5\n1,4.0,-1.5,25.1,99\n"
                                 "2,3.9,0.5,25.2,98.7\n");
  const auto d = load_csv(p);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.records[2], (SampleRecord{2, 3.9, 0.5, 25.2, 98.7}));
}

TEST_F(LoadCsv, HeaderOnlyIsEmptyDataset) {
  const auto p = write("empty.csv", "t_s,voltage_v,current_a,temp_c,soc_pct\n");
  try {
    load_csv(p);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("empty dataset"), std::string::npos);
  }
}

TEST_F(LoadCsv, SocOutOfRangeReportsLine) {
  const auto p = write("bad.csv", "t_s,voltage_v,current_a,temp_c,soc_pct\n0,4.1,-1,25,99\n1,4.1,-1,25,101\n");
  try {
    load_csv(p);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST_F(LoadCsv, MalformedRowIsParseErrorWithLine) {
  const auto p = write("bad.csv", "t_s,voltage_v,current_a,temp_c,soc_pct\n0,4.1,-1,25,99\n1,4.1,abc,25,98\n");
  try {
    load_csv(p);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_csv(write("short.csv", "t_s,voltage_v,current_a,temp_c,soc_pct\n0,4.1,-1,25\n")), ParseError);
  EXPECT_THROW(load_csv(write("long.csv", "t_s,voltage_v,current_a,temp_c,soc_pct\n0,4.1,-1,25,1,2\n")), ParseError);
  EXPECT_THROW(load_csv(write("comma.csv", "t_s,voltage_v,current_a,temp_c,soc_pct\n0,4;1,-1,25,1\n")), ParseError);
}

TEST_F(LoadCsv, RejectsWrongHeaderAndOtherInvariants) {
  EXPECT_THROW(load_csv(write("h.csv", "time,voltage_v,current_a,temp_c,soc_pct\n0,4,-1,25,50\n")), ParseError);
  EXPECT_THROW(load_csv(write("v.csv", "t_s,voltage_v,current_a,temp_c,soc_pct\n0,0,-1,25,50\n")), ValidationError);
  EXPECT_THROW(load_csv(write("t.csv", "t_s,voltage_v,current_a,temp_c,soc_pct\n5,4,-1,25,50\n4,4,-1,25,50\n")),
               ValidationError);
  EXPECT_THROW(load_csv(dir_ / "missing.csv"), IoError);
}

TEST_F(LoadCsv, WriteThenLoadIsBitExact) {
  const auto d = make_dataset(200);
  const auto p = dir_ / "rt.csv";
  write_csv(d, p);
  EXPECT_EQ(load_csv(p).records, d.records);
}

TEST(FitNormalizer, SymmetricPair) {
  Dataset d{"x", {{0, 3.0, -1, 20, 0}, {1, 5.0, 1, 30, 0}}};
  const auto n = fit_normalizer(d);
  EXPECT_DOUBLE_EQ(n.mean[1], 0.0);
  EXPECT_DOUBLE_EQ(n.std[1], 1.0);
}

TEST(FitNormalizer, PopulationStandardDeviation) {
  Dataset d{"x", {{0, 1, 0, 1, 0}, {1, 2, 2, 2, 0}, {2, 3, 4, 3, 0}}};
  const auto n = fit_normalizer(d);
  EXPECT_DOUBLE_EQ(n.mean[1], 2.0);
  // population variance of {0,2,4} = (4+0+4)/3
  EXPECT_NEAR(n.std[1], std::sqrt(8.0 / 3.0), 1e-15);
}

TEST(FitNormalizer, ConstantFeatureNamesFeature) {
  Dataset d{"x", {{0, 3.7, -1, 25, 0}, {1, 3.8, 1, 25, 0}}};
  try {
    fit_normalizer(d);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("temperature"), std::string::npos);
  }
  EXPECT_THROW(fit_normalizer(Dataset{}), ValidationError);
}

TEST(ApplyNormalizer, StandardizesItsFitSet) {
  const auto d = make_dataset(1000, 5);
  const auto n = fit_normalizer(d);
  const auto x = apply_normalizer(n, d);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double s = 0, ss = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, f);
    const double mean = s / static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) ss += (x(i, f) - mean) * (x(i, f) - mean);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_LT(std::abs(std::sqrt(ss / static_cast<double>(x.rows())) - 1.0), 1e-9);
  }
}

TEST(ApplyNormalizer, MeanMapsToZeroAndOneSigmaToOne) {
  Normalizer n{{3.5, -1.0, 25.0}, {0.2, 2.0, 4.0}, true};
  const std::vector<SampleRecord> rows{{0, 3.5, -1.0, 25.0, 50}, {1, 3.7, 1.0, 29.0, 60}};
  const auto x = apply_normalizer(n, rows);
  for (std::size_t f = 0; f < 3; ++f) {
    EXPECT_EQ(x(0, f), 0.0);
    EXPECT_NEAR(x(1, f), 1.0, 1e-12);
  }
  EXPECT_EQ(targets(Dataset{"", rows}), (Vector{50, 60}));
  EXPECT_THROW(apply_normalizer(Normalizer{}, rows), ContractError);
}

TEST(ApplyNormalizer, StatisticsComeFromTrainSplitOnly) {
  // Validation/test rows are shifted far away; fitting on the train split
  // must ignore them entirely.
  Dataset all = make_dataset(300, 9);
  auto split = split_holdout(all, 0.6, 0.2, 17);
  for (auto* part : {&split.val, &split.test})
    for (auto& r : part->records) {
      r.voltage += 10.0;
      r.current -= 50.0;
      r.temperature += 100.0;
    }
  const auto n = fit_normalizer(split.train);
  const auto reference = fit_normalizer(Dataset{"", split.train.records});
  EXPECT_EQ(n, reference);
  double vmean = 0;
  for (const auto& r : split.train.records) vmean += r.voltage;
  EXPECT_NEAR(n.mean[0], vmean / static_cast<double>(split.train.size()), 1e-12);
  EXPECT_LT(n.mean[0], 4.2);
}

TEST(SplitHoldout, SizesFollowRounding) {
  const auto s = split_holdout(make_dataset(10), 0.8, 0.1, 3);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.val.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
}

TEST(SplitHoldout, PartitionLawAndDeterminism) {
  const auto d = make_dataset(137);
  const auto a = split_holdout(d, 0.7, 0.15, 99);
  const auto b = split_holdout(d, 0.7, 0.15, 99);
  EXPECT_EQ(a.train_idx, b.train_idx);
  EXPECT_EQ(a.val_idx, b.val_idx);
  EXPECT_EQ(a.test_idx, b.test_idx);
  std::vector<std::size_t> all;
  for (const auto* v : {&a.train_idx, &a.val_idx, &a.test_idx}) all.insert(all.end(), v->begin(), v->end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(137);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(all, expect);
  EXPECT_NE(split_holdout(d, 0.7, 0.15, 100).train_idx, a.train_idx);
}

TEST(SplitHoldout, NoShuffleKeepsFileOrder) {
  const auto s = split_holdout(make_dataset(10), 0.8, 0.1, 3, false);
  EXPECT_EQ(s.train_idx, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(s.test_idx, (std::vector<std::size_t>{9}));
}

TEST(SplitHoldout, RejectsEmptyPartitionsAndBadFractions) {
  EXPECT_THROW(split_holdout(make_dataset(3), 0.8, 0.1, 1), ConfigError);
  EXPECT_THROW(split_holdout(make_dataset(10), 0.9, 0.1, 1), ConfigError);
  EXPECT_THROW(split_holdout(make_dataset(10), 0.0, 0.1, 1), ConfigError);
  EXPECT_THROW(split_holdout(make_dataset(10), 0.7, -0.1, 1), ConfigError);
}

TEST(SplitTrainVal, TwoWayPartition) {
  const auto s = split_train_val(make_dataset(20), 0.25, 4);
  EXPECT_EQ(s.train.size(), 15u);
  EXPECT_EQ(s.val.size(), 5u);
  EXPECT_TRUE(s.test.empty());
}

TEST(KFold, EvenSplit) {
  const auto a = kfold_split(10, 5, 1);
  EXPECT_EQ(a.fold_sizes(), (std::vector<std::size_t>(5, 2)));
}

TEST(KFold, UnevenSplit) {
  auto sizes = kfold_split(7, 4, 1).fold_sizes();
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{1, 2, 2, 2}));
}

TEST(KFold, DeterministicAndValidated) {
  EXPECT_EQ(kfold_split(50, 8, 12).fold_of, kfold_split(50, 8, 12).fold_of);
  EXPECT_THROW(kfold_split(5, 6, 1), ConfigError);
  EXPECT_THROW(kfold_split(5, 1, 1), ConfigError);
}

TEST(KFold, TrainingAndValidationIndicesPartition) {
  const auto a = kfold_split(23, 4, 5);
  for (std::size_t f = 0; f < 4; ++f) {
    auto tr = a.training_indices(f);
    const auto va = a.validation_indices(f);
    EXPECT_EQ(tr.size() + va.size(), 23u);
    for (auto i : va) EXPECT_FALSE(std::binary_search(tr.begin(), tr.end(), i));
  }
}

TEST(BatchIter, SizesAndOrder) {
  Matrix x(10, 3);
  Vector y(10);
  for (std::size_t i = 0; i < 10; ++i) {
    x(i, 0) = static_cast<double>(i);
    y[i] = static_cast<double>(i);
  }
  const auto batches = batch_iter(x, y, 4);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches[0].y.size(), 4u);
  EXPECT_EQ(batches[1].y.size(), 4u);
  EXPECT_EQ(batches[2].y.size(), 2u);
  double expect = 0;
  for (const auto& b : batches)
    for (std::size_t r = 0; r < b.y.size(); ++r) {
      EXPECT_EQ(b.y[r], expect);
      EXPECT_EQ(b.x(r, 0), expect);
      expect += 1;
    }
  const auto one = batch_iter(x, y, 64);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].y.size(), 10u);
  EXPECT_THROW(batch_iter(x, y, 0), ConfigError);
  EXPECT_THROW(batch_iter(x, Vector(9), 2), ShapeError);
}

TEST(BatchIter, ShuffledCoversEveryRowOnce) {
  Matrix x(33, 3);
  Vector y(33);
  for (std::size_t i = 0; i < 33; ++i) y[i] = static_cast<double>(i);
  const auto a = batch_iter(x, y, 5, 77);
  const auto b = batch_iter(x, y, 5, 77);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].rows, b[i].rows);
    for (std::size_t r = 0; r < a[i].rows.size(); ++r) EXPECT_EQ(a[i].y[r], static_cast<double>(a[i].rows[r]));
    rows.insert(rows.end(), a[i].rows.begin(), a[i].rows.end());
  }
  std::sort(rows.begin(), rows.end());
  for (std::size_t i = 0; i < 33; ++i) EXPECT_EQ(rows[i], i);
}

TEST(Rng, ReproducibleStreamsAndRanges) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng r(1);
  double sum = 0, sq = 0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.index(7), 7u);
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(3, 4, 5), derive_seed(3, 4, 5));
}

}  // namespace
}  // namespace socdfn
