#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "leocell/dataset.hpp"
#include "leocell/error.hpp"
#include "leocell/rng.hpp"
#include "leocell/simulate.hpp"

using namespace leocell;

namespace {

CyclingDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "test.csv");
}

std::string to_csv(const CyclingDataset& d) {
  std::ostringstream out;
  write_csv(d, out);
  return out.str();
}

std::string header() { return std::string(kCsvHeader) + "\n"; }

}  // namespace

TEST(Csv, SingleRow) {
  auto d = parse(header() + "10,10,0,99.762,2.9256\n");
  ASSERT_EQ(d.size(), 1u);
  const auto& r = d.records()[0];
  EXPECT_EQ(r.temperature_c, 10.0);
  EXPECT_EQ(r.cycle, 0);
  EXPECT_EQ(*r.rc_pct, 99.762);
  EXPECT_EQ(*r.eodv_v, 2.9256);
}

TEST(Csv, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(parse(header()).empty());
}

TEST(Csv, NegativeCycleNamesLine) {
  try {
    parse(header() + "10,10,-1,99,2.9\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Csv, MalformedRows) {
  EXPECT_THROW(parse(header() + "10,10,0,99\n"), ValidationError);
  EXPECT_THROW(parse(header() + "10,abc,0,99,2.9\n"), ValidationError);
  EXPECT_THROW(parse(header() + "10,10,1.5,99,2.9\n"), ValidationError);
  EXPECT_THROW(parse("T,DOD,C\n"), ValidationError);
  EXPECT_THROW(parse(header() + "10,10,0,130,2.9\n"), ValidationError);
  EXPECT_THROW(parse(header() + "10,10,0,99,0\n"), ValidationError);
}

TEST(Csv, DuplicateKeyReportsBothLines) {
  try {
    parse(header() + "10,10,0,99,2.9\n20,10,0,98,2.8\n10,10,0,97,2.7\n");
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  }
}

TEST(Csv, OptionalFieldsAndSorting) {
  auto d = parse(header() + "20,10,5,,2.5\n10,10,7,90,\n10,10,3,91,2.6\r\n");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.records()[0].cycle, 3);
  EXPECT_EQ(d.records()[1].cycle, 7);
  EXPECT_FALSE(d.records()[1].eodv_v);
  EXPECT_FALSE(d.records()[2].rc_pct);
  EXPECT_FALSE(d.has_target(Target::RC));
  EXPECT_EQ(d.with_target(Target::RC).size(), 2u);
}

TEST(Csv, EmptyDatasetWritesHeaderOnly) {
  EXPECT_EQ(to_csv(CyclingDataset{}), header());
}

TEST(Csv, CanonicalDatasetIs157Lines) {
  auto d = generate(SimulationPlan{}, DegradationModelParams{});
  auto text = to_csv(d);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 157);
}

TEST(Csv, RoundTripIsBitExactOnRandomDatasets) {
  Xoshiro256 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CyclingRecord> recs;
    const int n = 1 + static_cast<int>(rng.uniform01() * 60);
    for (int i = 0; i < n; ++i) {
      CyclingRecord r;
      r.temperature_c = rng.uniform(-20, 60);
      r.dod_pct = rng.uniform(0, 100);
      r.cycle = static_cast<std::int64_t>(rng.next() % 1000000);
      if (rng.uniform01() < 0.8) r.rc_pct = rng.uniform(0, 120);
      if (rng.uniform01() < 0.8) r.eodv_v = rng.uniform(1e-6, 4.2);
      recs.push_back(r);
    }
    CyclingDataset d(recs, "random");
    auto back = parse(to_csv(d));
    EXPECT_EQ(back, d);
  }
}

TEST(Csv, FileRoundTripAndUnwritablePath) {
  auto d = generate(SimulationPlan{}, DegradationModelParams{});
  auto path = std::filesystem::temp_directory_path() / "leocell_ds_roundtrip.csv";
  write_csv(d, path);
  EXPECT_EQ(read_csv(path), d);
  std::filesystem::remove(path);
  EXPECT_THROW(write_csv(d, "/nonexistent-dir/x.csv"), ValidationError);
  EXPECT_THROW(read_csv("/nonexistent-dir/x.csv"), ValidationError);
}

TEST(Split, EvenOddByRankWithinGroup) {
  CyclingDataset d({{10, 10, 0, 90.0, {}}, {10, 10, 1000, 89.0, {}},
                    {10, 10, 2000, 88.0, {}}, {10, 10, 3000, 87.0, {}}});
  auto [even, odd] = split_even_odd(d);
  ASSERT_EQ(even.size(), 2u);
  ASSERT_EQ(odd.size(), 2u);
  EXPECT_EQ(even.records()[0].cycle, 0);
  EXPECT_EQ(even.records()[1].cycle, 2000);
  EXPECT_EQ(odd.records()[0].cycle, 1000);
  EXPECT_EQ(odd.records()[1].cycle, 3000);
}

TEST(Split, SingleRecordGroup) {
  CyclingDataset d({{10, 10, 5, 90.0, {}}});
  auto [even, odd] = split_even_odd(d);
  EXPECT_EQ(even.size(), 1u);
  EXPECT_TRUE(odd.empty());
}

TEST(Split, CanonicalThirteenPerSetting) {
  auto d = generate(SimulationPlan{}, DegradationModelParams{});
  auto [even, odd] = split_even_odd(d);
  for (const auto& s : d.settings()) {
    auto count = [&](const CyclingDataset& part) {
      return std::count_if(part.records().begin(), part.records().end(),
                           [&](const auto& r) {
                             return r.temperature_c == s.temperature_c &&
                                    r.dod_pct == s.dod_pct;
                           });
    };
    EXPECT_EQ(count(even), 13);
    EXPECT_EQ(count(odd), 13);
  }
}

TEST(Split, PartitionPropertyOnIrregularGroups) {
  Xoshiro256 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<CyclingRecord> recs;
    for (int s = 0; s < 4; ++s) {
      const int n = 1 + static_cast<int>(rng.uniform01() * 9);
      for (int i = 0; i < n; ++i) {
        recs.push_back({10.0 * s, 10.0, static_cast<std::int64_t>(i * 7 + trial), 80.0, {}});
      }
    }
    CyclingDataset d(recs);
    auto [even, odd] = split_even_odd(d);
    std::vector<CyclingRecord> merged(even.records().begin(), even.records().end());
    merged.insert(merged.end(), odd.records().begin(), odd.records().end());
    EXPECT_EQ(CyclingDataset(merged), d);  // union = input; constructor rejects overlap
    for (const auto& st : d.settings()) {
      auto in = [&](const CyclingDataset& part) {
        return std::count_if(part.records().begin(), part.records().end(),
                             [&](const auto& r) { return r.temperature_c == st.temperature_c; });
      };
      const auto diff = in(even) - in(odd);
      EXPECT_TRUE(diff == 0 || diff == 1);
    }
  }
}

TEST(Normalization, CanonicalRanges) {
  auto d = generate(SimulationPlan{}, DegradationModelParams{});
  auto spec = fit_normalization(d, Target::RC);
  EXPECT_EQ(spec.temperature_c, (Range{10, 30}));
  EXPECT_EQ(spec.dod_pct, (Range{10, 30}));
  EXPECT_EQ(spec.cycle, (Range{0, 25000}));
}

TEST(Normalization, DegenerateAndBounds) {
  CyclingDataset same_t({{10, 10, 0, 90.0, {}}, {10, 20, 100, 80.0, {}}});
  EXPECT_THROW(fit_normalization(same_t, Target::RC), ValidationError);
  auto d = generate(SimulationPlan{}, DegradationModelParams{});
  EXPECT_NO_THROW(fit_normalization(d, Target::RC, 0.1, 0.9));
  EXPECT_THROW(fit_normalization(d, Target::RC, 0.1, 1.0), ValidationError);
  EXPECT_THROW(fit_normalization(d, Target::RC, 0.0, 0.9), ValidationError);
  CyclingDataset missing({{10, 10, 0, 90.0, {}}, {20, 20, 100, {}, 2.0}});
  EXPECT_THROW(fit_normalization(missing, Target::RC), ValidationError);
}

TEST(Normalization, AffineExamples) {
  NormalizationSpec spec;
  spec.cycle = {0, 25000};
  EXPECT_DOUBLE_EQ(spec.normalize("cycle", 12500), 0.5);
  EXPECT_EQ(spec.normalize(Variable::Cycle, 0), spec.output_low);
  // Past the range it extrapolates: 0.1 + 0.8 * 30000/25000.
  EXPECT_NEAR(spec.normalize(Variable::Cycle, 30000), 1.06, 1e-15);
  EXPECT_THROW(spec.normalize("voltage", 1.0), ValidationError);
  EXPECT_EQ(spec.first_out_of_range(0.5, 0.5, 30000), Variable::Cycle);
  EXPECT_FALSE(spec.first_out_of_range(0.5, 0.5, 25000));
}

namespace {

double max_roundtrip_error_ulps(const Range& range, Xoshiro256& rng, int samples) {
  NormalizationSpec spec;
  spec.target = range;
  const double scale = std::max(std::abs(range.min), std::abs(range.max));
  const double ulp = std::nextafter(scale, INFINITY) - scale;
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = rng.uniform(range.min, range.max);
    const double back = spec.denormalize(Variable::Target, spec.normalize(Variable::Target, x));
    worst = std::max(worst, std::abs(back - x) / ulp);
  }
  return worst;
}

}  // namespace

// Errors are measured in ulps of the range magnitude max(|min|, |max|); a
// value near zero inside a wide range cannot keep ulp(x) precision through
// the [0.1, 0.9] scaled representation.
TEST(Normalization, RoundTripWithinOneUlpOnDataRanges) {
  Xoshiro256 rng(17);
  for (const Range& r : {Range{10, 30}, Range{0, 25000}, Range{43.706, 99.762},
                         Range{0.1456, 2.9256}}) {
    EXPECT_LE(max_roundtrip_error_ulps(r, rng, 100000), 1.0);
  }
}

TEST(Normalization, RoundTripWithinTwoUlpsOnArbitraryRanges) {
  Xoshiro256 rng(18);
  for (int trial = 0; trial < 300; ++trial) {
    const double lo = rng.uniform(-1e4, 1e4);
    EXPECT_LE(max_roundtrip_error_ulps({lo, lo + rng.uniform(1e-3, 3e4)}, rng, 200), 2.0);
  }
}
