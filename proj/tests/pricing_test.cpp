#include "scoco/pricing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "support/testbeds.hpp"

namespace scoco {
namespace {

SCoCoSpec bond_spec(int T, int K, double threshold, double coupon) {
  SCoCoSpec spec;
  spec.maturity_steps = T;
  spec.coupon = coupon;
  spec.spread_threshold = threshold;
  spec.standstill_periods = K;
  return spec;
}

TEST(DiscountFactors, CompoundsPeriodByPeriod) {
  const std::vector<double> rates{0.02, 0.025, 0.022, 0.018};
  const std::vector<double> df = discount_factors(rates, 0.5, 3);
  ASSERT_EQ(df.size(), 4u);
  EXPECT_DOUBLE_EQ(df[0], 1.0);
  EXPECT_DOUBLE_EQ(df[1], std::exp(-0.01));
  EXPECT_DOUBLE_EQ(df[2], std::exp(-0.01) * std::exp(-0.0125));
  EXPECT_NEAR(df[3], std::exp(-0.0335), 1e-15);
  EXPECT_THROW(discount_factors(rates, 0.5, -1), std::invalid_argument);
  // Discounting to step n consumes rates[0..n-1]; four rates support n == 4
  // but not n == 5.
  ASSERT_EQ(discount_factors(rates, 0.5, 4).size(), 5u);
  EXPECT_THROW(discount_factors(rates, 0.5, 5), std::invalid_argument);
}

TEST(Price, HandTracedSinglePath) {
  const std::vector<double> rates{0.02, 0.025, 0.022, 0.018, 0.02, 0.03, 0.01};
  const std::vector<double> spreads{100, 200, 250, 350, 120, 110, 90};
  const ScenarioSet set = testbeds::manual_set({rates}, {spreads}, 0.5);
  const SCoCoSpec spec = bond_spec(4, 2, 300.0, 0.03);

  const CashflowDecomposition parts = decompose_cashflows(set, spec);
  ASSERT_EQ(parts.annuity.size(), 1u);
  EXPECT_NEAR(parts.annuity[0], 1.9678010709425044, 1e-12);
  EXPECT_NEAR(parts.principal[0], 0.9347277206160275, 1e-12);
  EXPECT_EQ(parts.deferral_steps[0], 2);
  EXPECT_EQ(parts.suspended_steps[0], 2);

  const PriceResult result = price(set, spec);
  EXPECT_NEAR(result.price, 0.9937617527443027, 1e-12);
  EXPECT_DOUBLE_EQ(result.std_error, 0.0);  // single path
  EXPECT_DOUBLE_EQ(result.mean_deferral_steps, 2.0);
  EXPECT_DOUBLE_EQ(result.mean_suspended_steps, 2.0);
  EXPECT_NEAR(par_rate(set, spec), 0.03317016153096689, 1e-12);
}

TEST(Price, StraightBondMatchesClosedForm) {
  const int T = 10;
  const double r = 0.04;
  const double dt = 0.5;
  const double coupon = 0.03;
  const ScenarioSet set = testbeds::flat_set(3, 20, r, 100.0, dt);
  const SCoCoSpec spec = bond_spec(T, 2, 300.0, coupon);
  const PriceResult result = price(set, spec);

  const double d = std::exp(-r * dt);
  double expected = std::pow(d, T);
  for (int t = 1; t <= T; ++t) expected += coupon * std::pow(d, t);
  EXPECT_NEAR(result.price, expected, 1e-12);
  EXPECT_DOUBLE_EQ(result.mean_deferral_steps, 0.0);
  EXPECT_DOUBLE_EQ(result.mean_suspended_steps, 0.0);

  const double par = par_rate(set, spec);
  double annuity = 0.0;
  for (int t = 1; t <= T; ++t) annuity += std::pow(d, t);
  EXPECT_NEAR(par, (1.0 - std::pow(d, T)) / annuity, 1e-12);

  SCoCoSpec at_par = spec;
  at_par.coupon = par;
  EXPECT_NEAR(price(set, at_par).price, 1.0, 1e-12);
}

TEST(Price, AffineInCoupon) {
  const std::vector<double> rates(17, 0.03);
  const std::vector<double> clean(17, 150.0);
  std::vector<double> breached(17, 150.0);
  breached[2] = 400.0;
  breached[7] = 450.0;
  const ScenarioSet set =
      testbeds::manual_set({rates, rates}, {clean, breached}, 0.5);
  SCoCoSpec spec = bond_spec(8, 3, 300.0, 0.02);
  const CashflowDecomposition parts = decompose_cashflows(set, spec);
  const PriceResult low = price_from_decomposition(parts, 0.02);
  const PriceResult high = price_from_decomposition(parts, 0.06);
  const PriceResult mid = price_from_decomposition(parts, 0.04);
  EXPECT_GT(high.price, low.price);
  EXPECT_NEAR(mid.price, 0.5 * (low.price + high.price), 1e-14);
  spec.coupon = 0.06;
  EXPECT_DOUBLE_EQ(price(set, spec).price, high.price);
}

TEST(Price, FullySuspendedBondHasNoParRate) {
  const ScenarioSet set = testbeds::flat_set(2, 13, 0.02, 500.0, 0.5);
  const SCoCoSpec spec = bond_spec(10, 2, 300.0, 0.05);
  const PriceResult result = price(set, spec);
  EXPECT_DOUBLE_EQ(result.mean_annuity, 0.0);
  EXPECT_GT(result.mean_principal, 0.0);
  EXPECT_THROW(par_rate(set, spec), std::runtime_error);
}

TEST(Price, HorizonMustCoverWorstCaseDeferral) {
  const ScenarioSet set = testbeds::flat_set(2, 10, 0.02, 100.0, 0.5);
  EXPECT_NO_THROW(price(set, bond_spec(10, 0, 300.0, 0.03)));
  EXPECT_THROW(price(set, bond_spec(10, 2, 300.0, 0.03)),
               std::invalid_argument);
  SCoCoSpec dual = bond_spec(8, 1, 300.0, 0.03);
  dual.dual = DualTriggerSpec{2000.0, 1, 3};
  EXPECT_THROW(price(set, dual), std::invalid_argument);  // needs index paths
}

TEST(Price, DualTriggerMatchesSingleWhenOneFamilyFires) {
  const std::vector<double> rates(21, 0.025);
  std::vector<double> spreads(21, 150.0);
  spreads[4] = 400.0;
  spreads[11] = 500.0;
  ScenarioSet set = testbeds::manual_set({rates}, {spreads}, 0.5);
  set.has_index = true;
  set.index.assign(set.rates.size(), 1500.0);  // always idiosyncratic

  SCoCoSpec dual = bond_spec(14, 1, 300.0, 0.04);
  dual.dual = DualTriggerSpec{2000.0, 1, 4};
  const PriceResult dual_result = price(set, dual);

  const SCoCoSpec single = bond_spec(14, 4, 300.0, 0.04);
  const PriceResult single_result = price(set, single);
  EXPECT_DOUBLE_EQ(dual_result.price, single_result.price);
  EXPECT_DOUBLE_EQ(dual_result.mean_suspended_steps,
                   single_result.mean_suspended_steps);
}

TEST(Price, ThreadCountDoesNotChangeValues) {
  ScenarioConfig config;
  config.n_regime_scenarios = 2;
  config.n_paths_per_regime = 40;
  config.horizon_years = 6.0;
  config.pricing_steps_per_year = 2;
  config.days_per_year = 126;
  config.seed = 3141;
  config.rho = 0.3;
  const ScenarioSet set = generate(config, testbeds::high_risk_factor(),
                                   testbeds::rate_factor());
  const SCoCoSpec spec = bond_spec(10, 2, 300.0, 0.03);
  const CashflowDecomposition one = decompose_cashflows(set, spec, 1);
  const CashflowDecomposition three = decompose_cashflows(set, spec, 3);
  EXPECT_EQ(one.annuity, three.annuity);
  EXPECT_EQ(one.principal, three.principal);
  EXPECT_EQ(one.deferral_steps, three.deferral_steps);
}

TEST(Price, StandardErrorShrinksWithPathCount) {
  ScenarioConfig config;
  config.n_regime_scenarios = 1;
  config.n_paths_per_regime = 400;
  config.horizon_years = 6.0;
  config.pricing_steps_per_year = 2;
  config.days_per_year = 252;
  config.seed = 2718;
  config.rho = 0.3;
  const SCoCoSpec spec = bond_spec(10, 2, 300.0, 0.03);

  const ScenarioSet small = generate(config, testbeds::high_risk_factor(),
                                     testbeds::rate_factor());
  config.n_paths_per_regime = 1600;
  const ScenarioSet large = generate(config, testbeds::high_risk_factor(),
                                     testbeds::rate_factor());
  const double se_small = price(small, spec).std_error;
  const double se_large = price(large, spec).std_error;
  ASSERT_GT(se_small, 0.0);
  const double ratio = se_large / se_small;
  EXPECT_GT(ratio, 0.4);
  EXPECT_LT(ratio, 0.6);
}

}  // namespace
}  // namespace scoco
