#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "deeppos/csi_data.hpp"
#include "deeppos/error.hpp"
#include "deeppos/io_util.hpp"
#include "test_util.hpp"

namespace deeppos {
namespace {

FingerprintDataset single_packet_dataset(std::vector<std::vector<double>> rows) {
  FingerprintDataset ds;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.sample_points.push_back({static_cast<int>(i), {double(i), 0.0}, {CsiPacket{rows[i]}}});
  }
  return ds;
}

std::vector<double> filled(double v) { return std::vector<double>(kPacketLength, v); }

TEST(NormalizeDataset, MinMaxEndpoints) {
  auto a = filled(4.0);
  a[0] = 2.0;
  a[1] = 6.0;
  const auto ds = normalize_dataset(single_packet_dataset({a, filled(4.0)}));
  const auto& out = ds.sample_points[0].packets[0].amplitudes;
  EXPECT_DOUBLE_EQ(out[0], 0.0);
  EXPECT_DOUBLE_EQ(out[1], 1.0);
  EXPECT_DOUBLE_EQ(out[2], 0.5);
  ASSERT_TRUE(ds.normalization.has_value());
  EXPECT_EQ(ds.normalization->min, 2.0);
  EXPECT_EQ(ds.normalization->max, 6.0);
}

TEST(NormalizeDataset, UnitRangeIsIdentity) {
  auto a = filled(0.25);
  a[0] = 0.0;
  a[5] = 1.0;
  const auto raw = single_packet_dataset({a, filled(0.75)});
  const auto ds = normalize_dataset(raw);
  EXPECT_EQ(ds.sample_points, raw.sample_points);
}

TEST(NormalizeDataset, MatchesElementwiseOracleAndPreservesOrder) {
  auto raw = test::random_dataset(2, 1, 99, 10.0, 50.0);
  // Oracle: scan for extrema, then scale each value independently.
  double lo = 1e300, hi = -1e300;
  for (const auto& sp : raw.sample_points)
    for (double v : sp.packets[0].amplitudes) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const auto ds = normalize_dataset(raw);
  std::vector<double> flat_raw, flat_out;
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t i = 0; i < kPacketLength; ++i) {
      const double r = raw.sample_points[s].packets[0].amplitudes[i];
      const double o = ds.sample_points[s].packets[0].amplitudes[i];
      EXPECT_NEAR(o, (r - lo) / (hi - lo), 1e-15);
      EXPECT_GE(o, 0.0);
      EXPECT_LE(o, 1.0);
      flat_raw.push_back(r);
      flat_out.push_back(o);
    }
  for (std::size_t i = 0; i < flat_raw.size(); ++i)
    for (std::size_t j = 0; j < flat_raw.size(); ++j)
      if (flat_raw[i] < flat_raw[j]) EXPECT_LE(flat_out[i], flat_out[j]);
}

TEST(NormalizeDataset, DegenerateScaleIsAnError) {
  try {
    normalize_dataset(single_packet_dataset({filled(3.0), filled(3.0)}));
    FAIL() << "expected degenerate scale";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_scale);
  }
}

TEST(NormalizeDataset, RejectsNegativeAmplitudes) {
  auto a = filled(1.0);
  a[3] = -0.5;
  EXPECT_THROW(normalize_dataset(single_packet_dataset({a, filled(2.0)})), Error);
}

TEST(NormalizeDataset, IdempotentOnRandomDatasets) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto once = normalize_dataset(test::random_dataset(3, 2, seed, 5.0, 80.0));
    const auto twice = normalize_dataset(once);
    for (std::size_t s = 0; s < once.size(); ++s)
      for (std::size_t p = 0; p < 2; ++p)
        for (std::size_t i = 0; i < kPacketLength; ++i)
          EXPECT_NEAR(once.sample_points[s].packets[p].amplitudes[i],
                      twice.sample_points[s].packets[p].amplitudes[i], 1e-12);
    EXPECT_NEAR(once.normalization->min, twice.normalization->min, 1e-12);
    EXPECT_NEAR(once.normalization->max, twice.normalization->max, 1e-12);
  }
}

TEST(NormalizePacket, ClampsOutsideTrainingRange) {
  const NormalizationRecord rec{2.0, 6.0};
  const std::vector<double> raw{0.0, 2.0, 4.0, 6.0, 9.0};
  const auto out = normalize_packet(raw, rec);
  EXPECT_EQ(out, (std::vector<double>{0.0, 0.0, 0.5, 1.0, 1.0}));
}

TEST(ValidateDataset, ValidDatasetHasEmptyReport) {
  const auto ds = normalize_dataset(test::random_dataset(3, 2, 5));
  EXPECT_TRUE(validate_dataset(ds).empty());
}

TEST(ValidateDataset, ShortPacketIsReported) {
  auto ds = test::random_dataset(3, 2, 5);
  ds.sample_points[1].packets[1].amplitudes.pop_back();
  const auto report = validate_dataset(ds);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].sp_index, 1);
  EXPECT_EQ(report[0].packet_index, 1);
  EXPECT_NE(report[0].message.find("89"), std::string::npos);
}

TEST(ValidateDataset, OutOfRangeAfterClaimedNormalization) {
  auto ds = normalize_dataset(test::random_dataset(3, 1, 5));
  ds.sample_points[2].packets[0].amplitudes[7] = 1.5;
  const auto report = validate_dataset(ds);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].sp_index, 2);
  EXPECT_NE(report[0].message.find("outside [0,1]"), std::string::npos);
}

TEST(ValidateDataset, StructuralProblems) {
  auto ds = test::random_dataset(3, 1, 5);
  ds.sample_points[2].id = 5;
  ds.sample_points[0].packets.clear();
  const auto report = validate_dataset(ds);
  EXPECT_EQ(report.size(), 2u);
  EXPECT_FALSE(validate_dataset(test::random_dataset(1, 1, 5)).empty());
}

std::string csv_header() {
  std::string h = "sp_id,x,y,packet_idx";
  for (std::size_t i = 0; i < kPacketLength; ++i) h += ",a" + std::to_string(i);
  return h + "\n";
}

std::string csv_row(int id, double x, double y, int pkt, double v = 0.0) {
  std::string r = std::to_string(id) + "," + format_double(x) + "," + format_double(y) + "," +
                  std::to_string(pkt);
  for (std::size_t i = 0; i < kPacketLength; ++i) r += "," + format_double(v);
  return r + "\n";
}

TEST(LoadDataset, ZeroFile) {
  test::TempDir dir("csv");
  {
    std::ofstream f(dir / "d.csv");
    f << csv_header() << csv_row(0, 0.5, 0.5, 0) << csv_row(1, 1.5, 0.5, 0);
  }
  const auto ds = load_dataset(dir / "d.csv");
  ASSERT_EQ(ds.size(), 2u);
  for (const auto& sp : ds.sample_points) {
    ASSERT_EQ(sp.packets.size(), 1u);
    for (double a : sp.packets[0].amplitudes) EXPECT_EQ(a, 0.0);
  }
  EXPECT_FALSE(ds.normalization.has_value());
}

TEST(LoadDataset, NineteenByThirty) {
  test::TempDir dir("csv");
  {
    std::ofstream f(dir / "d.csv");
    f << csv_header();
    for (int j = 0; j < 19; ++j)
      for (int l = 0; l < 30; ++l) f << csv_row(j, j * 0.3, 1.0, l, 0.01 * l);
  }
  const auto ds = load_dataset(dir / "d.csv");
  ASSERT_EQ(ds.size(), 19u);
  for (const auto& sp : ds.sample_points) EXPECT_EQ(sp.packets.size(), 30u);
}

TEST(LoadDataset, GroupsInterleavedRowsInFileOrder) {
  const std::string text = csv_header() + csv_row(1, 2, 2, 0, 0.1) + csv_row(0, 1, 1, 0, 0.2) +
                           csv_row(1, 2, 2, 1, 0.3);
  const auto ds = dataset_from_csv(text, "mem");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.sample_points[1].packets.size(), 2u);
  EXPECT_EQ(ds.sample_points[1].packets[0].amplitudes[0], 0.1);
  EXPECT_EQ(ds.sample_points[1].packets[1].amplitudes[0], 0.3);
  EXPECT_EQ(ds.sample_points[0].position, (Position{1, 1}));
}

void expect_parse_error(const std::string& text, const std::string& fragment) {
  try {
    dataset_from_csv(text, "mem");
    FAIL() << "expected a parse error containing '" << fragment << "'";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(LoadDataset, ErrorsNameTheLine) {
  const auto ok0 = csv_row(0, 0, 0, 0);
  expect_parse_error(ok0, "mem:1");  // header missing
  expect_parse_error(csv_header() + ok0 + "0,0,0,1,5\n", "mem:3: expected 94 columns");
  expect_parse_error(csv_header() + ok0 + ok0, "mem:3: duplicate");
  std::string bad = csv_row(0, 0, 0, 1);
  bad.replace(bad.find(",0,0,1,") + 7, 1, "x");
  expect_parse_error(csv_header() + ok0 + bad, "mem:3: malformed amplitude");
  expect_parse_error(csv_header() + ok0 + csv_row(-1, 0, 0, 0), "mem:3: sp_id");
  expect_parse_error(csv_header() + ok0 + csv_row(0, 1, 0, 1), "mem:3: coordinates differ");
  expect_parse_error(csv_header() + ok0 + csv_row(2, 0, 0, 0), "not contiguous");
}

TEST(LoadDataset, RoundTripIsExact) {
  test::TempDir dir("rt");
  for (std::uint64_t seed : {3u, 4u}) {
    auto ds = normalize_dataset(test::random_dataset(4, 3, seed, 0.1, 77.0));
    ds.sample_points[2].position = {1.0 / 3.0, 2.0e-7};
    write_dataset(ds, dir / "rt.csv", {{"source", "unit test"}});
    const auto back = load_dataset(dir / "rt.csv");
    EXPECT_EQ(back, ds);
    EXPECT_EQ(read_metadata(metadata_path_for(dir / "rt.csv")).provenance.at("source"),
              "unit test");
  }
}

TEST(SelectSamplePoints, Relabels) {
  const auto ds = test::random_dataset(5, 1, 1);
  const int ids[] = {4, 1};
  const auto sub = select_sample_points(ds, ids);
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub.sample_points[0].id, 0);
  EXPECT_EQ(sub.sample_points[0].position, ds.sample_points[4].position);
  EXPECT_EQ(sub.sample_points[1].id, 1);
  EXPECT_TRUE(validate_dataset(sub).empty());
}

}  // namespace
}  // namespace deeppos
