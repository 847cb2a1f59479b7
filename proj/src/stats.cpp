#include "scoco/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scoco {

namespace {

double pairwise_sum_impl(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(x, half) + pairwise_sum_impl(x + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> x) {
  return pairwise_sum_impl(x.data(), x.size());
}

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: no observations");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("variance: no observations");
  const double m = mean(x);
  std::vector<double> dev(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - m;
    dev[i] = d * d;
  }
  return pairwise_sum(dev) / static_cast<double>(x.size());
}

double mean_standard_error(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double m = mean(x);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - m;
    dev[i] = d * d;
  }
  const double sample_var = pairwise_sum(dev) / static_cast<double>(n - 1);
  return std::sqrt(sample_var / static_cast<double>(n));
}

double quantile(std::span<const double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile: no observations");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q outside [0,1]");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  if (s.size() == 1) return s[0];
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= s.size()) return s.back();
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

double median(std::span<const double> x) { return quantile(x, 0.5); }

double interquartile_range(std::span<const double> x) {
  return quantile(x, 0.75) - quantile(x, 0.25);
}

SummaryStats summarize(std::span<const double> x) {
  SummaryStats s;
  s.mean = mean(x);
  s.stdev = std::sqrt(variance(x));
  s.median = quantile(x, 0.5);
  s.q05 = quantile(x, 0.05);
  s.q25 = quantile(x, 0.25);
  s.q75 = quantile(x, 0.75);
  s.q95 = quantile(x, 0.95);
  return s;
}

}  // namespace scoco
