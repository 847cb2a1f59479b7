#include "scoco/srmr.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "scoco/stats.hpp"

namespace scoco {

MomentTargets estimate_moments(std::span<const double> levels,
                               double initial_level) {
  if (levels.empty()) throw std::invalid_argument("estimate_moments: no observations");
  if (levels.size() < 3) {
    throw std::invalid_argument(
        "estimate_moments: need at least 3 observations for smoothness");
  }
  for (double s : levels) {
    if (!(s > 0.0)) {
      throw std::invalid_argument("estimate_moments: levels must be positive");
    }
  }
  MomentTargets t;
  t.level_mean = mean(levels);
  t.level_stdev = std::sqrt(variance(levels));

  std::vector<double> returns(levels.size() - 1);
  for (std::size_t i = 1; i < levels.size(); ++i) {
    returns[i - 1] = std::log(levels[i] / levels[i - 1]);
  }
  t.return_stdev = std::sqrt(variance(returns));

  std::vector<double> sq_changes(returns.size() - 1);
  for (std::size_t i = 1; i < returns.size(); ++i) {
    const double d = returns[i] - returns[i - 1];
    sq_changes[i - 1] = d * d;
  }
  t.sq_change_mean = mean(sq_changes);
  t.initial_level = initial_level > 0.0 ? initial_level : levels.front();
  return t;
}

SRMRParams calibrate(const MomentTargets& t) {
  if (!(t.level_mean > 0.0) || !(t.initial_level > 0.0)) {
    throw std::invalid_argument("calibrate: levels must be positive");
  }
  if (!(t.level_stdev > 0.0) || !(t.return_stdev > 0.0) ||
      !(t.sq_change_mean > 0.0)) {
    throw std::invalid_argument("calibrate: degenerate targets (zero variance)");
  }
  const double sr2 = t.return_stdev * t.return_stdev;
  const double ratio2 = (t.level_stdev / t.level_mean) * (t.level_stdev / t.level_mean);

  SRMRParams p;
  p.k2 = sr2 / std::log1p(ratio2);
  p.k0 = p.k2 * std::log(t.level_mean / t.initial_level) - 0.5 * sr2;

  const double excess = t.sq_change_mean - p.k2 * sr2;
  if (!(excess > 0.0)) {
    throw std::invalid_argument(
        "calibrate: smoothness incompatible with return variance");
  }
  const double sigma2 = 2.0 * sr2 * (std::sqrt(1.0 + excess / sr2) - 1.0);
  p.sigma = std::sqrt(sigma2);
  p.k1 = sigma2 / (2.0 * sr2);
  return p;
}

MomentTargets analytic_moments(const SRMRParams& p, double initial_level) {
  if (!(initial_level > 0.0)) {
    throw std::invalid_argument("analytic_moments: initial level must be positive");
  }
  if (!(p.k1 > 0.0) || !(p.k2 > 0.0)) {
    throw std::invalid_argument("analytic_moments: k1, k2 must be positive");
  }
  const double sigma2 = p.sigma * p.sigma;
  const double v = sigma2 / (2.0 * p.k1 * p.k2);
  MomentTargets t;
  t.initial_level = initial_level;
  t.level_mean = initial_level * std::exp(p.k0 / p.k2 + 0.5 * v);
  const double var_S = initial_level * initial_level *
                       std::exp(2.0 * p.k0 / p.k2 + v) * std::expm1(v);
  t.level_stdev = std::sqrt(var_S);
  t.return_stdev = std::sqrt(sigma2 / (2.0 * p.k1));
  t.sq_change_mean = 0.5 * sigma2 * (p.k1 + p.k2 / p.k1 + 2.0);
  return t;
}

double moment_residual(const SRMRParams& p, const MomentTargets& t) {
  const MomentTargets implied = analytic_moments(p, t.initial_level);
  double worst = 0.0;
  auto rel = [&worst](double implied_v, double target_v) {
    const double denom = std::max(std::abs(target_v), 1e-300);
    worst = std::max(worst, std::abs(implied_v - target_v) / denom);
  };
  rel(implied.level_mean, t.level_mean);
  rel(implied.level_stdev * implied.level_stdev, t.level_stdev * t.level_stdev);
  rel(implied.return_stdev * implied.return_stdev, t.return_stdev * t.return_stdev);
  rel(implied.sq_change_mean, t.sq_change_mean);
  return worst;
}

SRMRState srmr_step(const SRMRState& state, const SRMRParams& p, double dt,
                    double noise) {
  SRMRState next;
  const double drift = p.k0 - p.k1 * state.ret - p.k2 * state.integral;
  next.ret = state.ret + drift * dt + p.sigma * noise;
  next.integral = state.integral + next.ret * dt;
  next.level = state.level * std::exp(next.ret * dt);
  return next;
}

SRMRParams rebase_initial_level(const SRMRParams& p, double old_level,
                                double new_level) {
  if (!(old_level > 0.0) || !(new_level > 0.0)) {
    throw std::invalid_argument("rebase_initial_level: levels must be positive");
  }
  SRMRParams out = p;
  out.k0 = p.k0 + p.k2 * std::log(old_level / new_level);
  return out;
}

std::pair<double, double> correlated_noise(double rho, double eps1, double eps2) {
  if (rho < -1.0 || rho > 1.0) {
    throw std::invalid_argument("correlated_noise: rho outside [-1, 1]");
  }
  return {eps1, rho * eps1 + std::sqrt(1.0 - rho * rho) * eps2};
}

}  // namespace scoco
