#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace scoco {

// Second trigger gated on a market stress index: a spread breach with the
// index at or above index_threshold opens a systemic standstill of
// systemic_periods; a breach with the index below it opens an idiosyncratic
// standstill of idiosyncratic_periods (longer: idiosyncratic distress gets
// less relief later).
struct DualTriggerSpec {
  double index_threshold = 0.0;
  int systemic_periods = 0;       // K1
  int idiosyncratic_periods = 0;  // K2 > K1
};

// Payment-standstill bond. maturity_steps (T) and standstill_periods (K) are
// in pricing-grid periods; coupon is the per-period coupon rate on unit
// notional; spread_threshold is in the spread's units (basis points).
struct SCoCoSpec {
  int maturity_steps = 0;
  double coupon = 0.0;
  double spread_threshold = 0.0;
  int standstill_periods = 0;
  std::optional<DualTriggerSpec> dual;
};

// Standstill bookkeeping for one scenario path over steps 0..T.
//
// A breach at an eligible step t (not inside any open standstill) suspends
// coupons at steps {t, ..., t+K} clipped at T; breach signals inside an open
// standstill are ignored; a new standstill may open at the first eligible
// step after one closes. If the final standstill covers T and started at J
// with T - J < K, the principal is deferred by T - J + 1 periods (never more
// than K); if it started exactly K periods before T the principal is paid on
// time even though the coupon at T is suspended.
struct StandstillSchedule {
  std::vector<std::uint8_t> suspended;                 // size T+1, 1 = no coupon
  std::vector<std::pair<int, int>> spread_intervals;   // systemic / single-trigger
  std::vector<std::pair<int, int>> idio_intervals;     // idiosyncratic (dual only)
  int suspended_spread_steps = 0;                      // |Lambda|
  int suspended_idio_steps = 0;                        // |Upsilon|
  int deferral_steps = 0;

  bool pays_coupon(int t) const { return suspended[static_cast<std::size_t>(t)] == 0; }
  int total_suspended() const { return suspended_spread_steps + suspended_idio_steps; }
};

// Single-trigger schedule. spreads must cover steps 0..T at least.
StandstillSchedule build_schedule(std::span<const double> spreads,
                                  const SCoCoSpec& spec);

// Dual-trigger schedule; spec.dual must be present and index must cover
// steps 0..T. Eligibility excludes steps inside an open standstill of either
// family, so the two families are disjoint by construction.
StandstillSchedule build_dual_schedule(std::span<const double> spreads,
                                       std::span<const double> index,
                                       const SCoCoSpec& spec);

}  // namespace scoco
