#include "scoco/instrument.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "scoco/rng.hpp"

namespace scoco {
namespace {

SCoCoSpec single_spec(int T, int K, double threshold) {
  SCoCoSpec spec;
  spec.maturity_steps = T;
  spec.coupon = 0.03;
  spec.spread_threshold = threshold;
  spec.standstill_periods = K;
  return spec;
}

SCoCoSpec dual_spec(int T, double threshold, double index_threshold, int K1,
                    int K2) {
  SCoCoSpec spec = single_spec(T, K1, threshold);
  spec.dual = DualTriggerSpec{index_threshold, K1, K2};
  return spec;
}

int suspended_count(const StandstillSchedule& s) {
  int n = 0;
  for (auto v : s.suspended) n += v;
  return n;
}

TEST(BuildSchedule, HandTracedPath) {
  const std::vector<double> spreads{100, 350, 120, 100, 100, 400, 100};
  const StandstillSchedule s = build_schedule(spreads, single_spec(6, 2, 300));
  const std::vector<std::uint8_t> expected{0, 1, 1, 1, 0, 1, 1};
  EXPECT_EQ(s.suspended, expected);
  ASSERT_EQ(s.spread_intervals.size(), 2u);
  EXPECT_EQ(s.spread_intervals[0], std::make_pair(1, 3));
  EXPECT_EQ(s.spread_intervals[1], std::make_pair(5, 6));
  EXPECT_EQ(s.suspended_spread_steps, 5);
  EXPECT_EQ(s.suspended_idio_steps, 0);
  EXPECT_EQ(s.total_suspended(), 5);
  EXPECT_EQ(s.deferral_steps, 2);  // last window starts 1 step before maturity
  EXPECT_TRUE(s.pays_coupon(0));
  EXPECT_FALSE(s.pays_coupon(1));
  EXPECT_TRUE(s.pays_coupon(4));
  EXPECT_FALSE(s.pays_coupon(6));
}

TEST(BuildSchedule, DeferralOnlyWhenWindowOverhangsMaturity) {
  std::vector<double> spreads(11, 100.0);
  spreads[7] = 500.0;
  const StandstillSchedule flush =
      build_schedule(spreads, single_spec(10, 3, 300));
  EXPECT_EQ(flush.deferral_steps, 0);  // window {7..10} ends exactly at T
  EXPECT_EQ(flush.suspended_spread_steps, 4);

  std::fill(spreads.begin(), spreads.end(), 100.0);
  spreads[9] = 500.0;
  const StandstillSchedule late =
      build_schedule(spreads, single_spec(10, 3, 300));
  EXPECT_EQ(late.deferral_steps, 2);
  EXPECT_EQ(late.suspended_spread_steps, 2);  // {9, 10}

  std::fill(spreads.begin(), spreads.end(), 100.0);
  spreads[10] = 500.0;
  const StandstillSchedule at_maturity =
      build_schedule(spreads, single_spec(10, 3, 300));
  EXPECT_EQ(at_maturity.deferral_steps, 1);
  EXPECT_EQ(at_maturity.suspended_spread_steps, 1);
}

TEST(BuildSchedule, SignalsInsideOpenWindowAreIgnored) {
  std::vector<double> spreads(9, 100.0);
  spreads[2] = 400.0;
  spreads[4] = 400.0;  // inside {2..5}: ignored
  spreads[6] = 400.0;  // first breach after the window closes
  const StandstillSchedule s = build_schedule(spreads, single_spec(8, 3, 300));
  ASSERT_EQ(s.spread_intervals.size(), 2u);
  EXPECT_EQ(s.spread_intervals[0], std::make_pair(2, 5));
  EXPECT_EQ(s.spread_intervals[1], std::make_pair(6, 8));
  EXPECT_EQ(s.suspended_spread_steps, 7);
  EXPECT_EQ(s.deferral_steps, 3);
}

TEST(BuildSchedule, BreachAtStepZeroAndThresholdIsInclusive) {
  std::vector<double> spreads{999.0, 100.0, 100.0, 100.0};
  const StandstillSchedule s = build_schedule(spreads, single_spec(3, 1, 300));
  const std::vector<std::uint8_t> expected{1, 1, 0, 0};
  EXPECT_EQ(s.suspended, expected);
  EXPECT_EQ(s.deferral_steps, 0);

  const std::vector<double> boundary{100.0, 300.0, 100.0, 100.0};
  const StandstillSchedule b =
      build_schedule(boundary, single_spec(3, 1, 300));
  EXPECT_FALSE(b.pays_coupon(1));  // breach at exactly the threshold
}

TEST(BuildSchedule, CleanPathSuspendsNothing) {
  const std::vector<double> spreads(8, 150.0);
  const StandstillSchedule s = build_schedule(spreads, single_spec(7, 2, 300));
  EXPECT_TRUE(s.spread_intervals.empty());
  EXPECT_EQ(s.total_suspended(), 0);
  EXPECT_EQ(s.deferral_steps, 0);
  for (int t = 0; t <= 7; ++t) EXPECT_TRUE(s.pays_coupon(t));
}

TEST(BuildSchedule, ZeroLengthWindowSuspendsSingleSteps) {
  std::vector<double> spreads(5, 100.0);
  spreads[2] = 400.0;
  spreads[4] = 400.0;
  const StandstillSchedule s = build_schedule(spreads, single_spec(4, 0, 300));
  ASSERT_EQ(s.spread_intervals.size(), 2u);
  EXPECT_EQ(s.spread_intervals[0], std::make_pair(2, 2));
  EXPECT_EQ(s.spread_intervals[1], std::make_pair(4, 4));
  EXPECT_EQ(s.deferral_steps, 0);
}

TEST(BuildSchedule, RejectsMalformedInput) {
  const std::vector<double> spreads(5, 100.0);
  EXPECT_THROW(build_schedule(spreads, single_spec(0, 2, 300)),
               std::invalid_argument);
  EXPECT_THROW(build_schedule(spreads, single_spec(4, -1, 300)),
               std::invalid_argument);
  EXPECT_THROW(build_schedule(spreads, single_spec(4, 2, 0.0)),
               std::invalid_argument);
  EXPECT_THROW(build_schedule(spreads, single_spec(5, 2, 300)),
               std::invalid_argument);
}

TEST(BuildDualSchedule, FamilyFollowsIndexLevel) {
  std::vector<double> spreads(9, 100.0);
  spreads[1] = 400.0;
  spreads[4] = 400.0;
  std::vector<double> index(9, 0.0);
  index[1] = 2500.0;  // at or above the index threshold: systemic
  index[4] = 1500.0;  // below: idiosyncratic
  const SCoCoSpec spec = dual_spec(8, 300, 2000, 1, 3);
  const StandstillSchedule s = build_dual_schedule(spreads, index, spec);
  ASSERT_EQ(s.spread_intervals.size(), 1u);
  ASSERT_EQ(s.idio_intervals.size(), 1u);
  EXPECT_EQ(s.spread_intervals[0], std::make_pair(1, 2));
  EXPECT_EQ(s.idio_intervals[0], std::make_pair(4, 7));
  EXPECT_EQ(s.suspended_spread_steps, 2);
  EXPECT_EQ(s.suspended_idio_steps, 4);
  EXPECT_EQ(s.total_suspended(), 6);
  EXPECT_EQ(s.deferral_steps, 0);  // idio window {4..7} ends before T
}

TEST(BuildDualSchedule, DeferralUsesTheLastWindowsOwnLength) {
  std::vector<double> spreads(9, 100.0);
  spreads[6] = 400.0;
  std::vector<double> index(9, 0.0);  // below threshold: idiosyncratic, K2 = 3
  const SCoCoSpec spec = dual_spec(8, 300, 2000, 1, 3);
  const StandstillSchedule s = build_dual_schedule(spreads, index, spec);
  EXPECT_EQ(s.deferral_steps, 3);  // T - J = 2 < K2

  std::vector<double> high(9, 3000.0);  // same breach, systemic: K1 = 1
  const StandstillSchedule sys = build_dual_schedule(spreads, high, spec);
  EXPECT_EQ(sys.deferral_steps, 0);  // window {6, 7} ends before T
}

TEST(BuildDualSchedule, MatchesSingleTriggerWhenIndexAlwaysSystemic) {
  RngStream rng(88111);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> spreads(13);
    for (auto& v : spreads) v = 50.0 + 550.0 * rng.uniform();
    const std::vector<double> index(13, 1e9);
    const SCoCoSpec dual = dual_spec(12, 300, 2000, 2, 5);
    const StandstillSchedule d = build_dual_schedule(spreads, index, dual);
    const StandstillSchedule s =
        build_schedule(spreads, single_spec(12, 2, 300));
    EXPECT_EQ(d.suspended, s.suspended);
    EXPECT_EQ(d.spread_intervals, s.spread_intervals);
    EXPECT_TRUE(d.idio_intervals.empty());
    EXPECT_EQ(d.deferral_steps, s.deferral_steps);
  }
}

TEST(BuildDualSchedule, RejectsMissingSpecAndShortIndex) {
  const std::vector<double> spreads(9, 100.0);
  const std::vector<double> index(9, 0.0);
  EXPECT_THROW(
      build_dual_schedule(spreads, index, single_spec(8, 2, 300)),
      std::invalid_argument);
  const std::vector<double> short_index(5, 0.0);
  EXPECT_THROW(
      build_dual_schedule(spreads, short_index, dual_spec(8, 300, 2000, 1, 3)),
      std::invalid_argument);
  SCoCoSpec bad = dual_spec(8, 300, 2000, 1, 3);
  bad.dual->idiosyncratic_periods = -1;
  EXPECT_THROW(build_dual_schedule(spreads, index, bad), std::invalid_argument);
}

TEST(ScheduleProperties, RandomPathsSatisfyInvariants) {
  RngStream rng(424243);
  const int T = 40;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> spreads(T + 1);
    for (auto& v : spreads) v = 50.0 + 550.0 * rng.uniform();
    std::vector<double> index(T + 1);
    for (auto& v : index) v = 1000.0 + 2000.0 * rng.uniform();
    const int K = 1 + static_cast<int>(rng.uniform() * 5.0);

    const SCoCoSpec spec = single_spec(T, K, 400.0);
    const StandstillSchedule s = build_schedule(spreads, spec);
    EXPECT_EQ(suspended_count(s), s.total_suspended());
    EXPECT_LE(s.deferral_steps, K);
    if (s.deferral_steps > 0) EXPECT_FALSE(s.pays_coupon(T));
    int prev_end = -1;
    for (const auto& [a, b] : s.spread_intervals) {
      EXPECT_GT(a, prev_end);
      EXPECT_LE(a, b);
      EXPECT_LE(b, T);
      EXPECT_LE(b - a, K);
      EXPECT_GE(spreads[static_cast<std::size_t>(a)], 400.0);
      prev_end = b;
    }

    const SCoCoSpec d = dual_spec(T, 400.0, 2000.0, K, K + 3);
    const StandstillSchedule ds = build_dual_schedule(spreads, index, d);
    EXPECT_EQ(suspended_count(ds), ds.total_suspended());
    EXPECT_LE(ds.deferral_steps, K + 3);
    std::vector<int> owner(static_cast<std::size_t>(T) + 1, 0);
    for (const auto& [a, b] : ds.spread_intervals)
      for (int t = a; t <= b; ++t) owner[static_cast<std::size_t>(t)] += 1;
    for (const auto& [a, b] : ds.idio_intervals)
      for (int t = a; t <= b; ++t) owner[static_cast<std::size_t>(t)] += 1;
    for (int t = 0; t <= T; ++t) {
      EXPECT_EQ(owner[static_cast<std::size_t>(t)],
                ds.suspended[static_cast<std::size_t>(t)] ? 1 : 0);
    }
  }
}

TEST(ScheduleProperties, SuspensionIsMonotoneInThreshold) {
  RngStream rng(515151);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> spreads(31);
    for (auto& v : spreads) v = 50.0 + 550.0 * rng.uniform();
    int prev = std::numeric_limits<int>::max();
    for (double threshold : {150.0, 300.0, 450.0}) {
      const StandstillSchedule s =
          build_schedule(spreads, single_spec(30, 3, threshold));
      EXPECT_LE(s.total_suspended(), prev);
      prev = s.total_suspended();
    }
  }
}

}  // namespace
}  // namespace scoco
