#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scoco {

// Pairwise (tree) summation: deterministic for a given ordering and with
// O(log n) rounding-error growth. Used everywhere a Monte Carlo mean must be
// independent of thread count.
double pairwise_sum(std::span<const double> x);

double mean(std::span<const double> x);

// Population variance (divide by n).
double variance(std::span<const double> x);

// Sample standard error of the mean: sqrt(sample variance / n), (n - 1)
// denominator inside. Returns 0 for n < 2.
double mean_standard_error(std::span<const double> x);

// Linear-interpolation quantile, q in [0, 1]. Copies and sorts the input.
double quantile(std::span<const double> x, double q);

double median(std::span<const double> x);

double interquartile_range(std::span<const double> x);

struct SummaryStats {
  double mean = 0.0;
  double stdev = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
};

SummaryStats summarize(std::span<const double> x);

}  // namespace scoco
