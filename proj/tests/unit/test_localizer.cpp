#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "deeppos/error.hpp"
#include "deeppos/localizer.hpp"
#include "deeppos/sae.hpp"

namespace deeppos {
namespace {

std::vector<CsiPacket> random_packets(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<CsiPacket> out(static_cast<std::size_t>(count));
  for (auto& p : out) {
    p.amplitudes.resize(kPacketLength);
    for (auto& v : p.amplitudes) v = u(rng);
  }
  return out;
}

SaeModel model_with_coordinates(int n, std::uint64_t seed) {
  auto m = init_model({50, 30, 20, 5}, n, seed, 0.5);
  for (int j = 0; j < n; ++j) m.sp_coordinates.push_back({j, {double(j), double(j % 3)}});
  m.normalization = {0.0, 1.0};
  return m;
}

TEST(SelectCandidates, SortSemantics) {
  const std::vector<double> e{3.0, 1.0, 2.0};
  EXPECT_EQ(select_candidates(e, 2), (std::vector<Candidate>{{1, 1.0}, {2, 2.0}}));
  EXPECT_EQ(select_candidates(e, 3), (std::vector<Candidate>{{1, 1.0}, {2, 2.0}, {0, 3.0}}));
}

TEST(SelectCandidates, TiesGoToLowerLabel) {
  const std::vector<double> e{1.0, 1.0, 5.0};
  EXPECT_EQ(select_candidates(e, 1), (std::vector<Candidate>{{0, 1.0}}));
  const std::vector<double> f{4.0, 2.0, 2.0, 2.0};
  EXPECT_EQ(select_candidates(f, 2), (std::vector<Candidate>{{1, 2.0}, {2, 2.0}}));
}

TEST(SelectCandidates, RangeChecked) {
  const std::vector<double> e{1.0, 2.0};
  EXPECT_THROW(select_candidates(e, 0), Error);
  EXPECT_THROW(select_candidates(e, 3), Error);
}

TEST(EstimatePosition, Examples) {
  const std::vector<Position> coords{{0, 0}, {2, 2}, {1, 1}, {5, -3}};
  const std::vector<Candidate> one{{3, 0.7}};
  EXPECT_EQ(estimate_position(one, coords), (Position{5, -3}));
  const std::vector<Candidate> mid{{0, 0.4}, {1, 0.4}};
  const auto m = estimate_position(mid, coords);
  EXPECT_DOUBLE_EQ(m.x, 1.0);
  EXPECT_DOUBLE_EQ(m.y, 1.0);
  const std::vector<Candidate> third{{0, 0.1}, {2, 0.2}};
  const auto t = estimate_position(third, coords);
  EXPECT_NEAR(t.x, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.y, 1.0 / 3.0, 1e-15);
}

TEST(EstimatePosition, ZeroErrorUsesFloor) {
  const std::vector<Position> coords{{0, 0}, {2, 0}};
  const std::vector<Candidate> c{{0, 0.0}, {1, 1.0}};
  const auto p = estimate_position(c, coords);
  EXPECT_TRUE(std::isfinite(p.x));
  EXPECT_NEAR(p.x, 2.0 * 1.0 / (1e9 + 1.0), 1e-15);
}

TEST(EstimatePosition, BadInputs) {
  const std::vector<Position> coords{{0, 0}};
  const std::vector<Candidate> none;
  const std::vector<Candidate> unknown{{4, 1.0}};
  EXPECT_THROW(estimate_position(none, coords), Error);
  EXPECT_THROW(estimate_position(unknown, coords), Error);
}

TEST(EstimatePosition, ScaleContainmentMonotonicity) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coord(-10.0, 10.0), err(0.01, 5.0), scale(0.001, 1000.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int r = 2 + trial % 4;
    std::vector<Position> coords;
    std::vector<Candidate> cands;
    for (int i = 0; i < r; ++i) {
      coords.push_back({coord(rng), coord(rng)});
      cands.push_back({i, err(rng)});
    }
    const auto p = estimate_position(cands, coords);
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const auto& c : coords) {
      lo_x = std::min(lo_x, c.x); hi_x = std::max(hi_x, c.x);
      lo_y = std::min(lo_y, c.y); hi_y = std::max(hi_y, c.y);
    }
    EXPECT_GE(p.x, lo_x - 1e-12);
    EXPECT_LE(p.x, hi_x + 1e-12);
    EXPECT_GE(p.y, lo_y - 1e-12);
    EXPECT_LE(p.y, hi_y + 1e-12);

    const double s = scale(rng);
    auto scaled = cands;
    for (auto& c : scaled) c.error *= s;
    const auto q = estimate_position(scaled, coords);
    EXPECT_NEAR(q.x, p.x, 1e-12 * (1.0 + std::abs(p.x)));
    EXPECT_NEAR(q.y, p.y, 1e-12 * (1.0 + std::abs(p.y)));

    auto closer = cands;
    closer[0].error *= 0.5;
    const auto m = estimate_position(closer, coords);
    const auto target = coords[0];
    EXPECT_LT(std::hypot(m.x - target.x, m.y - target.y),
              std::hypot(p.x - target.x, p.y - target.y));
  }
}

TEST(ReconstructionErrors, SinglePacketIsItsLoss) {
  const auto m = model_with_coordinates(4, 3);
  const auto pkts = random_packets(1, 9);
  const auto errs = label_reconstruction_errors(m, pkts);
  ASSERT_EQ(errs.size(), 4u);
  for (int j = 0; j < 4; ++j) {
    const auto y = forward(m, pkts[0].amplitudes, j).output;
    EXPECT_NEAR(errs[std::size_t(j)],
                reconstruction_loss(std::span<const double>(y.data(), 90), pkts[0].amplitudes),
                1e-13);
  }
}

TEST(ReconstructionErrors, MeanOverPackets) {
  const auto m = model_with_coordinates(3, 4);
  const auto pkts = random_packets(4, 10);
  const auto errs = label_reconstruction_errors(m, pkts);
  for (int j = 0; j < 3; ++j) {
    double sum = 0.0;
    for (const auto& p : pkts) {
      const auto y = forward(m, p.amplitudes, j).output;
      sum += reconstruction_loss(std::span<const double>(y.data(), 90), p.amplitudes);
    }
    EXPECT_NEAR(errs[std::size_t(j)], sum / 4.0, 1e-13);
  }
}

TEST(ReconstructionErrors, ZeroLabelColumnsGiveEqualErrors) {
  auto m = model_with_coordinates(6, 5);
  m.params.decoder[0].weights.rightCols(6).setZero();
  const auto errs = label_reconstruction_errors(m, random_packets(3, 11));
  for (double e : errs) EXPECT_EQ(e, errs[0]);
}

TEST(ReconstructionErrors, EncodeOncePerPacket) {
  for (int n : {2, 7, 15}) {
    const auto m = model_with_coordinates(n, 6);
    LocalizerCounters counters;
    label_reconstruction_errors(m, random_packets(5, 12), &counters);
    EXPECT_EQ(counters.encodes, 5u);
    EXPECT_EQ(counters.decodes, 5u * std::size_t(n));
  }
}

TEST(ReconstructionErrors, RejectsEmptyAndShortPackets) {
  const auto m = model_with_coordinates(3, 7);
  std::vector<CsiPacket> none;
  EXPECT_THROW(label_reconstruction_errors(m, none), Error);
  std::vector<CsiPacket> short_pkt{CsiPacket{std::vector<double>(10, 0.1)}};
  EXPECT_THROW(label_reconstruction_errors(m, short_pkt), Error);
}

TEST(Localize, EqualsComposition) {
  const auto m = model_with_coordinates(8, 8);
  const auto pkts = random_packets(5, 13);
  LocalizerCounters counters;
  const auto r = localize(m, pkts, 3, kDefaultErrorFloor, &counters);
  const auto errs = label_reconstruction_errors(m, pkts);
  const auto cands = select_candidates(errs, 3);
  const auto coords = model_positions(m);
  EXPECT_EQ(r.per_label_errors, errs);
  EXPECT_EQ(r.candidates, cands);
  EXPECT_EQ(r.estimate, estimate_position(cands, coords));
  EXPECT_EQ(r.packets_used, 5);
  EXPECT_EQ(counters.encodes, 5u);
  EXPECT_NE(r.to_json().find("\"estimate\""), std::string::npos);
}

}  // namespace
}  // namespace deeppos
