#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "scoco/instrument.hpp"
#include "scoco/scenario.hpp"
#include "scoco/stats.hpp"

namespace scoco {

// Regression basis for the backward induction. Columns are, in order:
// 0 the intercept, 1..degree the powers z^k of the cross-sectionally
// standardized short rate, degree+1 the payment indicator (1 when the coupon
// at that step is not suspended). Columns that are constant across paths are
// removed, and on rank deficiency the highest rate power goes first, then the
// indicator; the intercept always stays.
struct LsmBasisSpec {
  int degree = 1;
  bool payment_indicator = true;
};

struct RegressionStage {
  int step = 0;
  std::vector<int> columns;        // original column ids actually used
  std::vector<int> dropped_columns;
  Eigen::VectorXd coefficients;    // aligned with columns
  double r_squared = 0.0;
  double residual_stdev = 0.0;
  double max_orthogonality = 0.0;  // max_j |X_j . residual| / n_paths
};

// Fitted clean continuation values (no coupon at the step itself) across
// paths at one step: the model's price distribution at that future date.
struct PriceDistribution {
  int step = 0;
  std::vector<double> values;
  SummaryStats stats;
};

struct LsmResult {
  double price = 0.0;
  std::vector<RegressionStage> stages;             // steps 1..T-1, ascending
  std::vector<RegressionStage> redemption_stages;  // deferred-redemption fits
  std::vector<PriceDistribution> distributions;    // one per requested step
};

// Least-squares Monte Carlo valuation on an existing scenario set. Terminal
// values at maturity T are coupon (when paying) plus either immediate
// redemption or the regression-estimated value of redemption deferred by the
// path's standstill overhang; the conditional expectation of the discounted
// value is then fitted step by step down to 1, and the price is the
// discounted mean at step 0. horizon_steps (each in [1, T]) select the steps
// whose fitted value distribution is returned.
LsmResult lsm_price(const ScenarioSet& set, const SCoCoSpec& spec,
                    const LsmBasisSpec& basis = {},
                    std::span<const int> horizon_steps = {}, int threads = 1);

}  // namespace scoco
