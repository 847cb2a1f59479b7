#pragma once

#include <span>
#include <vector>

#include "scoco/instrument.hpp"
#include "scoco/scenario.hpp"

namespace scoco {

// Stochastic discount factors on the pricing grid from a path of short rates:
// df[0] = 1 and df[t] = exp(-sum_{u<t} r_u dt), i.e. each period accrues at
// the rate quoted at its start. Returns n + 1 factors for steps 0..n.
std::vector<double> discount_factors(std::span<const double> rates,
                                     double dt_years, int n);

// Per-path discounted cashflow pieces. Price is affine in the coupon:
// PV(path) = coupon * annuity + principal, with
//   annuity   = sum over paying coupon dates t in 1..T of df[t]
//   principal = df[T + deferral]
// which makes repricing across coupons and the par coupon exact.
struct CashflowDecomposition {
  std::vector<double> annuity;
  std::vector<double> principal;
  std::vector<int> deferral_steps;
  std::vector<int> suspended_steps;
};

// Builds the standstill schedule of every path (single or dual trigger,
// depending on spec.dual) and discounts its cashflows. Throws
// std::invalid_argument("scenario horizon too short") unless the grid covers
// maturity plus the worst-case deferral.
CashflowDecomposition decompose_cashflows(const ScenarioSet& set,
                                          const SCoCoSpec& spec,
                                          int threads = 1);

struct PriceResult {
  double price = 0.0;
  double std_error = 0.0;
  double mean_annuity = 0.0;
  double mean_principal = 0.0;
  double mean_deferral_steps = 0.0;
  double mean_suspended_steps = 0.0;
  std::vector<double> path_values;
};

PriceResult price_from_decomposition(const CashflowDecomposition& parts,
                                     double coupon);

// Monte Carlo price of the bond under spec.coupon.
PriceResult price(const ScenarioSet& set, const SCoCoSpec& spec,
                  int threads = 1);

// Coupon that prices the bond at par: (1 - mean principal) / (mean annuity).
// Throws std::runtime_error("par rate undefined") when every coupon date is
// suspended on every path (zero annuity).
double par_rate_from_decomposition(const CashflowDecomposition& parts);
double par_rate(const ScenarioSet& set, const SCoCoSpec& spec,
                int threads = 1);

}  // namespace scoco
