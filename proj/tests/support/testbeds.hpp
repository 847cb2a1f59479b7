#pragma once

// Shared test calibrations at sovereign-CDS-like scales: a high-risk curve
// with three spread regimes, mid- and low-risk curves with five, and a
// single-regime discount-rate factor. Also small builders for hand-made
// scenario sets used by the pricing and regression tests.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "scoco/regime_model.hpp"
#include "scoco/scenario.hpp"
#include "scoco/srmr.hpp"

namespace scoco::testbeds {

// Smoothness target E[(dr)^2] consistent with the level and return targets
// and a chosen per-day return damping k1. Follows from the moment system:
// k2 = vr / log1p(cv^2), E[(dr)^2] = vr (k1^2 + 2 k1 + k2).
inline double smoothness_for(double level_mean, double level_stdev,
                             double return_stdev, double k1) {
  const double vr = return_stdev * return_stdev;
  const double k2 =
      vr / std::log1p((level_stdev * level_stdev) / (level_mean * level_mean));
  return vr * (k1 * k1 + 2.0 * k1 + k2);
}

inline MomentTargets regime_targets(double level_mean, double level_stdev,
                                    double return_stdev, double k1 = 0.3) {
  MomentTargets t;
  t.level_mean = level_mean;
  t.level_stdev = level_stdev;
  t.return_stdev = return_stdev;
  t.sq_change_mean = smoothness_for(level_mean, level_stdev, return_stdev, k1);
  t.initial_level = level_mean;
  return t;
}

// Targets with prescribed dynamics (k1, k2) and level coefficient of
// variation; used where simulated moments are compared against targets and
// the per-day damping must stay in a regime the one-step discretization
// resolves accurately.
inline MomentTargets targets_from_dynamics(double level_mean, double level_cv,
                                           double k1, double k2) {
  const double vr = k2 * std::log1p(level_cv * level_cv);
  MomentTargets t;
  t.level_mean = level_mean;
  t.level_stdev = level_mean * level_cv;
  t.return_stdev = std::sqrt(vr);
  t.sq_change_mean = vr * (k1 * k1 + 2.0 * k1 + k2);
  t.initial_level = level_mean;
  return t;
}

inline std::vector<MomentTargets> high_risk_targets(double k1 = 0.3) {
  return {regime_targets(146.09, 103.90, 0.0445, k1),
          regime_targets(980.27, 363.36, 0.0520, k1),
          regime_targets(5770.43, 2917.45, 0.0805, k1)};
}

inline Eigen::VectorXd high_risk_stationary() {
  Eigen::VectorXd pi(3);
  pi << 0.5612, 0.2888, 0.15;
  return pi;
}

inline std::vector<double> high_risk_eigenvalues() { return {0.999, 0.998}; }

inline std::vector<MomentTargets> mid_risk_targets(double k1 = 0.3) {
  return {regime_targets(79.71, 45.48, 0.035, k1),
          regime_targets(137.69, 28.54, 0.030, k1),
          regime_targets(361.94, 68.99, 0.032, k1),
          regime_targets(203.73, 26.66, 0.028, k1),
          regime_targets(97.31, 15.82, 0.030, k1)};
}

inline Eigen::VectorXd mid_risk_stationary() {
  Eigen::VectorXd pi(5);
  pi << 0.278, 0.154, 0.150, 0.149, 0.269;
  return pi;
}

inline std::vector<MomentTargets> low_risk_targets(double k1 = 0.3) {
  return {regime_targets(22.22, 23.54, 0.050, k1),
          regime_targets(31.69, 8.85, 0.040, k1),
          regime_targets(45.60, 13.98, 0.045, k1),
          regime_targets(14.64, 3.73, 0.040, k1),
          regime_targets(8.25, 1.93, 0.045, k1)};
}

inline Eigen::VectorXd low_risk_stationary() {
  Eigen::VectorXd pi(5);
  pi << 0.25, 0.20, 0.15, 0.20, 0.20;
  return pi;
}

inline MomentTargets rate_targets() {
  return regime_targets(0.016, 0.003, 0.010, 0.3);
}

inline FactorModel single_regime_factor(const MomentTargets& targets,
                                        double initial_level) {
  FactorModel f;
  f.P = Eigen::MatrixXd::Ones(1, 1);
  f.targets = {targets};
  f.initial_regime = 0;
  f.initial_level = initial_level;
  return f;
}

inline FactorModel rate_factor() {
  return single_regime_factor(rate_targets(), 0.016);
}

// A short-rate factor with three policy regimes: tight (~3.5%),
// accommodative (~1.2%), and near-zero (~0.05%). The shift keeps the
// multiplicative dynamics on positive levels while the quoted rate can sit
// essentially at zero. Rate-regime dispersion at long horizons then dominates
// horizon price distributions the way a full policy cycle does.
inline FactorModel policy_rate_factor() {
  const double shift = 0.005;
  FactorModel f;
  f.targets = {regime_targets(0.035 + shift, 0.008, 0.010),
               regime_targets(0.012 + shift, 0.004, 0.012),
               regime_targets(0.0005 + shift, 0.002, 0.015)};
  Eigen::VectorXd pi(3);
  pi << 0.25, 0.35, 0.40;
  f.P = estimate_max_entropy(pi, {0.999, 0.998}).P;
  f.initial_regime = 2;
  f.initial_level = 0.0005;
  f.shift = shift;
  return f;
}

// An index factor for dual-trigger tests: one regime, level far above or
// far below any threshold the test uses.
inline FactorModel index_factor(double level) {
  return single_regime_factor(regime_targets(level, level * 0.05, 0.02, 0.3),
                              level);
}

inline FactorModel spread_factor(const std::vector<MomentTargets>& targets,
                                 const Eigen::VectorXd& stationary,
                                 const std::vector<double>& eigenvalues,
                                 int initial_regime, double initial_level) {
  FactorModel f;
  f.targets = targets;
  f.P = estimate_max_entropy(stationary, eigenvalues).P;
  f.initial_regime = initial_regime;
  f.initial_level = initial_level;
  return f;
}

inline const FactorModel& high_risk_factor() {
  static const FactorModel f =
      spread_factor(high_risk_targets(), high_risk_stationary(),
                    high_risk_eigenvalues(), 0, 146.09);
  return f;
}

inline const FactorModel& mid_risk_factor() {
  static const FactorModel f =
      spread_factor(mid_risk_targets(), mid_risk_stationary(),
                    default_eigenvalues(5), 0, 79.71);
  return f;
}

inline const FactorModel& low_risk_factor() {
  static const FactorModel f =
      spread_factor(low_risk_targets(), low_risk_stationary(),
                    default_eigenvalues(5), 4, 8.25);
  return f;
}

// Scenario set from explicit per-path series; all paths must share a length
// of n_steps + 1.
inline ScenarioSet manual_set(const std::vector<std::vector<double>>& rates,
                              const std::vector<std::vector<double>>& spreads,
                              double dt_years = 0.5) {
  if (rates.empty() || rates.size() != spreads.size())
    throw std::invalid_argument("manual_set: path count mismatch");
  ScenarioSet set;
  set.n_outer = 1;
  set.n_inner = static_cast<int>(rates.size());
  set.n_steps = static_cast<int>(rates.front().size()) - 1;
  set.dt_years = dt_years;
  for (std::size_t p = 0; p < rates.size(); ++p) {
    if (rates[p].size() != spreads[p].size() ||
        rates[p].size() != rates.front().size())
      throw std::invalid_argument("manual_set: ragged paths");
    set.rates.insert(set.rates.end(), rates[p].begin(), rates[p].end());
    set.spreads.insert(set.spreads.end(), spreads[p].begin(), spreads[p].end());
  }
  set.regimes.assign(set.rates.size(), 0);
  return set;
}

inline ScenarioSet flat_set(int n_paths, int n_steps, double rate,
                            double spread, double dt_years = 0.5) {
  std::vector<std::vector<double>> r(
      static_cast<std::size_t>(n_paths),
      std::vector<double>(static_cast<std::size_t>(n_steps) + 1, rate));
  std::vector<std::vector<double>> s(
      static_cast<std::size_t>(n_paths),
      std::vector<double>(static_cast<std::size_t>(n_steps) + 1, spread));
  return manual_set(r, s, dt_years);
}

}  // namespace scoco::testbeds
