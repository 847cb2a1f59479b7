#include "scoco/sensitivity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "support/testbeds.hpp"

namespace scoco {
namespace {

Eigen::VectorXd base3() {
  Eigen::VectorXd pi(3);
  pi << 0.5612, 0.2888, 0.15;
  return pi;
}

TEST(SampleDirichlet, DrawsAreProbabilityVectorsCenteredOnBase) {
  DirichletSpec spec;
  spec.base = base3();
  spec.concentration = 50.0;
  spec.n_samples = 400;
  RngStream stream(4321);
  const std::vector<Eigen::VectorXd> draws = sample_dirichlet(spec, stream);
  ASSERT_EQ(draws.size(), 400u);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  for (const Eigen::VectorXd& d : draws) {
    ASSERT_EQ(d.size(), 3);
    EXPECT_NEAR(d.sum(), 1.0, 1e-12);
    EXPECT_GT(d.minCoeff(), 0.0);
    mean += d;
  }
  mean /= static_cast<double>(draws.size());
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(mean(i), spec.base(i), 0.05);

  RngStream replay(4321);
  const std::vector<Eigen::VectorXd> again = sample_dirichlet(spec, replay);
  for (std::size_t k = 0; k < draws.size(); ++k)
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(again[k](i), draws[k](i));
}

TEST(SampleDirichlet, ConcentrationTightensDraws) {
  const auto spread_of = [](double concentration) {
    DirichletSpec spec;
    spec.base = base3();
    spec.concentration = concentration;
    spec.n_samples = 300;
    RngStream stream(777);
    const std::vector<Eigen::VectorXd> draws = sample_dirichlet(spec, stream);
    std::vector<double> first;
    for (const Eigen::VectorXd& d : draws) first.push_back(d(0));
    return summarize(first).stdev;
  };
  const double loose = spread_of(10.0);
  const double tight = spread_of(1000.0);
  EXPECT_LT(tight, loose / 3.0);
}

TEST(SampleDirichlet, CountsRejectedNearZeroDraws) {
  DirichletSpec spec;
  spec.base = Eigen::VectorXd(2);
  spec.base << 0.9, 0.1;
  spec.concentration = 0.5;  // shape 0.05 often underflows past the floor
  spec.n_samples = 50;
  RngStream stream(2024);
  int rejected = -1;
  const std::vector<Eigen::VectorXd> draws =
      sample_dirichlet(spec, stream, &rejected);
  EXPECT_EQ(draws.size(), 50u);
  EXPECT_GT(rejected, 0);
  for (const Eigen::VectorXd& d : draws) EXPECT_GE(d.minCoeff(), 1e-9);
}

TEST(SampleDirichlet, RejectsMalformedSpecs) {
  RngStream stream(1);
  DirichletSpec spec;
  spec.base = base3();
  spec.concentration = 10.0;
  spec.n_samples = 0;
  EXPECT_THROW(sample_dirichlet(spec, stream), std::invalid_argument);
  spec.n_samples = 1;
  spec.concentration = 0.0;
  EXPECT_THROW(sample_dirichlet(spec, stream), std::invalid_argument);
  spec.concentration = 10.0;
  spec.base = Eigen::VectorXd(2);
  spec.base << 0.9, 0.2;  // does not sum to 1
  EXPECT_THROW(sample_dirichlet(spec, stream), std::invalid_argument);
  spec.base << 1.1, -0.1;
  EXPECT_THROW(sample_dirichlet(spec, stream), std::invalid_argument);
  spec.base = Eigen::VectorXd(0);
  EXPECT_THROW(sample_dirichlet(spec, stream), std::invalid_argument);
}

RepriceSetup small_setup() {
  RepriceSetup setup;
  Eigen::VectorXd pi(2);
  pi << 0.7, 0.3;
  setup.spread = testbeds::spread_factor(
      {testbeds::regime_targets(120.0, 30.0, 0.02),
       testbeds::regime_targets(320.0, 90.0, 0.04)},
      pi, {0.95}, 0, 120.0);
  setup.rate = testbeds::rate_factor();
  setup.config.n_regime_scenarios = 1;
  setup.config.n_paths_per_regime = 8;
  setup.config.horizon_years = 3.0;
  setup.config.pricing_steps_per_year = 2;
  setup.config.days_per_year = 12;
  setup.config.seed = 5150;
  setup.spec.maturity_steps = 4;
  setup.spec.coupon = 0.02;
  setup.spec.spread_threshold = 300.0;
  setup.spec.standstill_periods = 1;
  setup.eigenvalues = {0.95};
  return setup;
}

TEST(RepriceUnder, DeterministicAndCenteredOnValidSamples) {
  const RepriceSetup setup = small_setup();
  DirichletSpec dirichlet;
  dirichlet.base = Eigen::VectorXd(2);
  dirichlet.base << 0.7, 0.3;
  dirichlet.concentration = 40.0;
  dirichlet.n_samples = 5;

  const RepriceSummary first = reprice_under(setup, dirichlet, 1);
  ASSERT_EQ(first.samples.size(), 5u);
  EXPECT_EQ(first.n_failed, 0);
  double mean = 0.0;
  for (const RepriceSample& s : first.samples) {
    EXPECT_TRUE(s.ok);
    EXPECT_TRUE(s.error.empty());
    EXPECT_NEAR(s.stationary.sum(), 1.0, 1e-12);
    EXPECT_GT(s.price, 0.0);
    EXPECT_LT(s.price, 2.0);
    mean += s.price;
  }
  mean /= 5.0;
  EXPECT_NEAR(first.price_stats.mean, mean, 1e-15);

  const RepriceSummary second = reprice_under(setup, dirichlet, 1);
  for (std::size_t k = 0; k < first.samples.size(); ++k) {
    EXPECT_DOUBLE_EQ(second.samples[k].price, first.samples[k].price);
    EXPECT_DOUBLE_EQ(second.samples[k].par, first.samples[k].par);
    for (int i = 0; i < 2; ++i)
      EXPECT_DOUBLE_EQ(second.samples[k].stationary(i),
                       first.samples[k].stationary(i));
  }
}

TEST(RepriceUnder, RecordsBlanketFailuresAndBaseMismatch) {
  RepriceSetup setup = small_setup();
  MomentTargets bad = testbeds::rate_targets();
  bad.sq_change_mean = 1e-15;  // below the feasibility floor for every sample
  setup.rate = testbeds::single_regime_factor(bad, 0.016);
  DirichletSpec dirichlet;
  dirichlet.base = Eigen::VectorXd(2);
  dirichlet.base << 0.7, 0.3;
  dirichlet.concentration = 40.0;
  dirichlet.n_samples = 3;
  EXPECT_THROW(reprice_under(setup, dirichlet, 1), std::runtime_error);

  const RepriceSetup good = small_setup();
  DirichletSpec mismatched = dirichlet;
  mismatched.base = base3();
  EXPECT_THROW(reprice_under(good, mismatched, 1), std::invalid_argument);
}

}  // namespace
}  // namespace scoco
