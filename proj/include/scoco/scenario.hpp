#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scoco/srmr.hpp"

namespace scoco {

// A regime-switching risk factor: a transition matrix over regimes (1x1 for a
// factor without switching) and one set of moment targets per regime. For
// rates, shift moves the series into positive territory before the
// multiplicative dynamics apply (simulated level = quoted value + shift);
// spreads and indices normally use shift = 0. initial_level is quoted (before
// shift). Per-regime parameters are recalibrated on regime entry with the
// current level as the starting point, and the running integral resets, so
// the new regime's asymptotic level is approached from where the path stands.
struct FactorModel {
  Eigen::MatrixXd P;
  std::vector<MomentTargets> targets;
  int initial_regime = 0;
  double initial_level = 0.0;
  double shift = 0.0;
};

struct ScenarioConfig {
  int n_regime_scenarios = 1;   // outer: independent regime chronologies
  int n_paths_per_regime = 1;   // inner: factor paths per chronology
  double horizon_years = 0.0;
  int pricing_steps_per_year = 2;
  int days_per_year = 252;
  std::uint64_t seed = 0;
  double rho = 0.0;             // daily noise correlation between rate and spread
};

// Paths sampled on the pricing grid (steps 0..n_steps, step 0 = today),
// path-major storage. Simulation itself is daily; the stored value at step t
// is the daily value on that grid day. regimes holds the spread factor's
// regime id per grid step.
struct ScenarioSet {
  int n_outer = 0;
  int n_inner = 0;
  int n_steps = 0;
  double dt_years = 0.5;
  bool has_index = false;
  std::vector<double> rates;
  std::vector<double> spreads;
  std::vector<double> index;
  std::vector<std::int16_t> regimes;

  int n_paths() const { return n_outer * n_inner; }
  int stride() const { return n_steps + 1; }
  std::span<const double> path_rates(int p) const {
    return {rates.data() + static_cast<std::size_t>(p) * stride(),
            static_cast<std::size_t>(stride())};
  }
  std::span<const double> path_spreads(int p) const {
    return {spreads.data() + static_cast<std::size_t>(p) * stride(),
            static_cast<std::size_t>(stride())};
  }
  std::span<const double> path_index(int p) const {
    return {index.data() + static_cast<std::size_t>(p) * stride(),
            static_cast<std::size_t>(stride())};
  }
  std::span<const std::int16_t> path_regimes(int p) const {
    return {regimes.data() + static_cast<std::size_t>(p) * stride(),
            static_cast<std::size_t>(stride())};
  }
};

// Generates n_outer * n_inner paths. Randomness is keyed by (seed,
// regime-scenario index, path index, factor id), so any path's values are
// independent of thread count, of the number of other paths, and of whether
// an index factor is present.
ScenarioSet generate(const ScenarioConfig& config, const FactorModel& spread,
                     const FactorModel& rate,
                     const std::optional<FactorModel>& index = std::nullopt,
                     int threads = 1);

// Full daily trajectory of one (outer, inner) pair; same stepping code as
// generate, recording every day instead of grid days only.
struct DailyScenario {
  std::vector<double> spreads;
  std::vector<double> rates;
  std::vector<double> index;
  std::vector<int> regimes;
};
DailyScenario simulate_daily(const ScenarioConfig& config,
                             const FactorModel& spread, const FactorModel& rate,
                             const std::optional<FactorModel>& index, int outer,
                             int inner);

// Stationary-weighted average of per-regime targets: the single-regime
// calibration used by the regime-off experiment.
MomentTargets weighted_average_targets(std::span<const MomentTargets> targets,
                                       std::span<const double> weights);

// Collapses a factor to one regime with the given fixed targets.
FactorModel regime_off_variant(const FactorModel& factor,
                               const MomentTargets& fixed_targets);

// Binary scenario cache: fixed header (counts and step metadata) followed by
// path-major 64-bit values. Round-trips a ScenarioSet exactly.
void write_scenario_cache(const ScenarioSet& set, const std::string& path);
ScenarioSet read_scenario_cache(const std::string& path);

// Long-format CSV: path,step,rate,spread[,index],regime.
void scenarios_to_csv(const ScenarioSet& set, std::ostream& os);

}  // namespace scoco
