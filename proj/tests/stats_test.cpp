#include "scoco/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

namespace scoco {
namespace {

TEST(Stats, PairwiseSumMatchesSequentialOnSmallInput) {
  const std::vector<double> x{1.5, -2.25, 3.0, 0.125, 10.0};
  EXPECT_DOUBLE_EQ(pairwise_sum(x), 12.375);
}

TEST(Stats, PairwiseSumLargeInputAccuracy) {
  std::vector<double> x(100001, 0.1);
  EXPECT_NEAR(pairwise_sum(x), 10000.1, 1e-9);
}

TEST(Stats, MeanAndVariance) {
  const std::vector<double> x{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  EXPECT_DOUBLE_EQ(mean(x), 5.0);
  EXPECT_DOUBLE_EQ(variance(x), 4.0);
}

TEST(Stats, MeanStandardErrorScalesWithSqrtN) {
  std::vector<double> x;
  for (int i = 0; i < 1000; ++i) x.push_back(i % 2 == 0 ? 1.0 : -1.0);
  std::vector<double> y = x;
  y.insert(y.end(), x.begin(), x.end());
  y.insert(y.end(), x.begin(), x.end());
  y.insert(y.end(), x.begin(), x.end());
  const double ratio = mean_standard_error(y) / mean_standard_error(x);
  EXPECT_NEAR(ratio, 0.5, 1e-3);
}

TEST(Stats, QuantileLinearInterpolation) {
  const std::vector<double> x{5.0, 1.0, 3.0, 2.0, 4.0};
  EXPECT_DOUBLE_EQ(quantile(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(x, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile(x, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile(x, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(x, 0.125), 1.5);
  EXPECT_DOUBLE_EQ(median(std::vector<double>{1.0, 2.0, 3.0, 4.0}), 2.5);
}

TEST(Stats, SummarizeConsistentWithPieces) {
  std::vector<double> x;
  for (int i = 1; i <= 101; ++i) x.push_back(static_cast<double>(i));
  const SummaryStats s = summarize(x);
  EXPECT_DOUBLE_EQ(s.mean, 51.0);
  EXPECT_DOUBLE_EQ(s.median, 51.0);
  EXPECT_DOUBLE_EQ(s.q25, 26.0);
  EXPECT_DOUBLE_EQ(s.q75, 76.0);
  EXPECT_DOUBLE_EQ(s.stdev, std::sqrt(variance(x)));
  EXPECT_DOUBLE_EQ(interquartile_range(x), 50.0);
}

}  // namespace
}  // namespace scoco
