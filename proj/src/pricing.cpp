#include "scoco/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scoco/parallel.hpp"
#include "scoco/stats.hpp"

namespace scoco {

std::vector<double> discount_factors(std::span<const double> rates,
                                     double dt_years, int n) {
  if (n < 0) throw std::invalid_argument("negative discount horizon");
  if (static_cast<int>(rates.size()) < n)
    throw std::invalid_argument("rate path shorter than discount horizon");
  std::vector<double> df(static_cast<std::size_t>(n) + 1);
  df[0] = 1.0;
  for (int t = 1; t <= n; ++t)
    df[static_cast<std::size_t>(t)] =
        df[static_cast<std::size_t>(t) - 1] *
        std::exp(-rates[static_cast<std::size_t>(t) - 1] * dt_years);
  return df;
}

CashflowDecomposition decompose_cashflows(const ScenarioSet& set,
                                          const SCoCoSpec& spec,
                                          int threads) {
  if (spec.maturity_steps <= 0)
    throw std::invalid_argument("maturity must be positive");
  if (spec.dual && !set.has_index)
    throw std::invalid_argument("dual trigger pricing needs index paths");
  const int T = spec.maturity_steps;
  // A standstill opening at the last eligible covered step can defer
  // redemption by up to the standstill length, so the grid must extend that
  // far past maturity for the redemption discount factor to exist.
  const int worst_deferral =
      spec.dual ? std::max(spec.dual->systemic_periods,
                           spec.dual->idiosyncratic_periods)
                : spec.standstill_periods;
  if (set.n_steps < T + worst_deferral)
    throw std::invalid_argument("scenario horizon too short");

  const auto n_paths = static_cast<std::size_t>(set.n_paths());
  CashflowDecomposition parts;
  parts.annuity.assign(n_paths, 0.0);
  parts.principal.assign(n_paths, 0.0);
  parts.deferral_steps.assign(n_paths, 0);
  parts.suspended_steps.assign(n_paths, 0);

  parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto pi = static_cast<int>(p);
      const auto spreads = set.path_spreads(pi);
      const StandstillSchedule schedule =
          spec.dual ? build_dual_schedule(spreads, set.path_index(pi), spec)
                    : build_schedule(spreads, spec);
      const std::vector<double> df =
          discount_factors(set.path_rates(pi), set.dt_years,
                           T + schedule.deferral_steps);
      double annuity = 0.0;
      for (int t = 1; t <= T; ++t)
        if (schedule.pays_coupon(t)) annuity += df[static_cast<std::size_t>(t)];
      parts.annuity[p] = annuity;
      parts.principal[p] = df[static_cast<std::size_t>(T + schedule.deferral_steps)];
      parts.deferral_steps[p] = schedule.deferral_steps;
      parts.suspended_steps[p] = schedule.total_suspended();
    }
  });
  return parts;
}

PriceResult price_from_decomposition(const CashflowDecomposition& parts,
                                     double coupon) {
  const std::size_t n = parts.annuity.size();
  if (n == 0 || parts.principal.size() != n)
    throw std::invalid_argument("empty or inconsistent cashflow decomposition");
  PriceResult result;
  result.path_values.resize(n);
  for (std::size_t p = 0; p < n; ++p)
    result.path_values[p] = coupon * parts.annuity[p] + parts.principal[p];
  result.price = mean(result.path_values);
  result.std_error = mean_standard_error(result.path_values);
  result.mean_annuity = mean(parts.annuity);
  result.mean_principal = mean(parts.principal);
  double deferral = 0.0;
  double suspended = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    deferral += parts.deferral_steps[p];
    suspended += parts.suspended_steps[p];
  }
  result.mean_deferral_steps = deferral / static_cast<double>(n);
  result.mean_suspended_steps = suspended / static_cast<double>(n);
  return result;
}

PriceResult price(const ScenarioSet& set, const SCoCoSpec& spec, int threads) {
  return price_from_decomposition(decompose_cashflows(set, spec, threads),
                                  spec.coupon);
}

double par_rate_from_decomposition(const CashflowDecomposition& parts) {
  if (parts.annuity.empty())
    throw std::invalid_argument("empty cashflow decomposition");
  const double annuity = mean(parts.annuity);
  const double principal = mean(parts.principal);
  if (annuity <= 0.0) throw std::runtime_error("par rate undefined");
  return (1.0 - principal) / annuity;
}

double par_rate(const ScenarioSet& set, const SCoCoSpec& spec, int threads) {
  return par_rate_from_decomposition(decompose_cashflows(set, spec, threads));
}

}  // namespace scoco
