#include "scoco/instrument.hpp"

#include <algorithm>
#include <stdexcept>

namespace scoco {

namespace {

void check_spec(const SCoCoSpec& spec, std::size_t n_spreads) {
  if (spec.maturity_steps < 1) throw std::invalid_argument("maturity must be at least one period");
  if (spec.standstill_periods < 0) throw std::invalid_argument("standstill length must be non-negative");
  if (!(spec.spread_threshold > 0.0)) throw std::invalid_argument("spread threshold must be positive");
  if (n_spreads < static_cast<std::size_t>(spec.maturity_steps) + 1) {
    throw std::invalid_argument("spread path shorter than maturity");
  }
}

// Opens an interval {t..t+K} clipped at T, marks suspensions, and returns the
// clipped end.
int open_interval(std::vector<std::uint8_t>& suspended, int t, int K, int T) {
  const int end = std::min(t + K, T);
  for (int u = t; u <= end; ++u) suspended[static_cast<std::size_t>(u)] = 1;
  return end;
}

// Deferral rule for the last interval [J, J+K] (unclipped end J+K): the
// principal slips by T - J + 1 only when the interval covers T strictly
// beyond its start window (T - J < K).
int deferral_for(int J, int K, int T) {
  if (J < 0) return 0;            // no interval opened
  if (J + K < T) return 0;        // does not cover maturity
  return (T - J < K) ? T - J + 1 : 0;
}

}  // namespace

StandstillSchedule build_schedule(std::span<const double> spreads,
                                  const SCoCoSpec& spec) {
  check_spec(spec, spreads.size());
  const int T = spec.maturity_steps;
  const int K = spec.standstill_periods;

  StandstillSchedule sched;
  sched.suspended.assign(static_cast<std::size_t>(T) + 1, 0);

  int open_until = -1;  // last suspended step of the currently open interval
  int last_start = -1;
  for (int t = 0; t <= T; ++t) {
    if (t <= open_until) continue;  // signals inside an open standstill are ignored
    if (spreads[static_cast<std::size_t>(t)] >= spec.spread_threshold) {
      open_until = open_interval(sched.suspended, t, K, T);
      sched.spread_intervals.emplace_back(t, open_until);
      last_start = t;
      sched.suspended_spread_steps += open_until - t + 1;
    }
  }
  sched.deferral_steps = deferral_for(last_start, K, T);
  return sched;
}

StandstillSchedule build_dual_schedule(std::span<const double> spreads,
                                       std::span<const double> index,
                                       const SCoCoSpec& spec) {
  check_spec(spec, spreads.size());
  if (!spec.dual.has_value()) throw std::invalid_argument("dual trigger spec missing");
  const DualTriggerSpec& dual = *spec.dual;
  if (dual.systemic_periods < 0 || dual.idiosyncratic_periods < 0) {
    throw std::invalid_argument("standstill lengths must be non-negative");
  }
  if (index.size() < static_cast<std::size_t>(spec.maturity_steps) + 1) {
    throw std::invalid_argument("index path shorter than maturity");
  }
  const int T = spec.maturity_steps;

  StandstillSchedule sched;
  sched.suspended.assign(static_cast<std::size_t>(T) + 1, 0);

  int open_until = -1;
  int last_start = -1;
  int last_K = 0;
  for (int t = 0; t <= T; ++t) {
    if (t <= open_until) continue;
    if (spreads[static_cast<std::size_t>(t)] < spec.spread_threshold) continue;
    const bool systemic = index[static_cast<std::size_t>(t)] >= dual.index_threshold;
    const int K = systemic ? dual.systemic_periods : dual.idiosyncratic_periods;
    open_until = open_interval(sched.suspended, t, K, T);
    if (systemic) {
      sched.spread_intervals.emplace_back(t, open_until);
      sched.suspended_spread_steps += open_until - t + 1;
    } else {
      sched.idio_intervals.emplace_back(t, open_until);
      sched.suspended_idio_steps += open_until - t + 1;
    }
    last_start = t;
    last_K = K;
  }
  sched.deferral_steps = deferral_for(last_start, last_K, T);
  return sched;
}

}  // namespace scoco
