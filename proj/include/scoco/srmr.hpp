#pragma once

#include <span>
#include <utility>

namespace scoco {

// Moment targets for one regime of the spread-return mean-reverting process,
// in per-step (daily) units. level_* describe the level series S_t, return_*
// the log-returns r_t = log(S_t / S_{t-1}), and sq_change_mean is the mean
// squared one-step change of the return, E[(r_t - r_{t-1})^2], which controls
// the smoothness of simulated paths.
struct MomentTargets {
  double level_mean = 0.0;      // \hat S
  double level_stdev = 0.0;     // \hat sigma_S
  double return_stdev = 0.0;    // \hat sigma_r
  double sq_change_mean = 0.0;  // \hat s^2
  double initial_level = 0.0;   // S_0 the process starts from
};

// Parameters of the process
//   dr_t = (k0 - k1 r_t - k2 C_t) dt + sigma w_t,   w_t ~ N(0, dt)
//   C_t  = sum of r_s dt up to t,   S_t = S_0 exp(C_t).
// k1 damps the return, k2 pulls the cumulative return toward k0/k2, so the
// level mean-reverts to S_0 exp(k0/k2 + sigma^2/(4 k1 k2)).
struct SRMRParams {
  double k0 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double sigma = 0.0;
};

struct SRMRState {
  double ret = 0.0;       // r_t
  double integral = 0.0;  // C_t
  double level = 0.0;     // S_t
};

// Sample moments of a level series: population-style normalization (divide by
// the number of contributing observations: n for levels, n-1 for returns,
// n-2 for squared return changes). Requires at least 3 strictly positive
// observations. Throws std::invalid_argument on "no observations" or
// non-positive levels.
MomentTargets estimate_moments(std::span<const double> levels,
                               double initial_level = 0.0);

// Closed-form calibration. The four moment identities are, asymptotically,
//   E[S]   = S0 exp(k0/k2 + sigma^2 / (4 k1 k2))          = level_mean
//   var[S] = S0^2 e^{2 k0/k2 + v} (e^v - 1), v = sigma^2/(2 k1 k2)
//                                                          = level_stdev^2
//   var[r] = sigma^2 / (2 k1)                              = return_stdev^2
//   E[(dr)^2] = sigma^2/2 (k1 + k2/k1 + 2)                 = sq_change_mean
// which invert to
//   k2     = sr^2 / log(1 + sS^2 / Shat^2)
//   k0     = k2 log(Shat / S0) - sr^2 / 2
//   sigma^2= 2 sr^2 (sqrt(1 + (s2 - k2 sr^2) / sr^2) - 1)
//   k1     = sigma^2 / (2 sr^2)
// Feasibility requires sq_change_mean > k2 * return_stdev^2; otherwise throws
// std::invalid_argument("smoothness incompatible with return variance").
// Degenerate targets (non-positive levels, stdevs, or smoothness) also throw.
SRMRParams calibrate(const MomentTargets& targets);

// Forward map: the asymptotic moments implied by params (and S0). Inverse of
// calibrate up to roundoff; used by round-trip and residual tests.
MomentTargets analytic_moments(const SRMRParams& params, double initial_level);

// Max relative residual of the four moment identities at (params, targets).
double moment_residual(const SRMRParams& params, const MomentTargets& targets);

// One step of the recursion. noise must already be scaled by sqrt(dt)
// (i.e. a draw from N(0, dt)). Update order: the return increment uses the
// current integral, then the integral accrues the *new* return, then the
// level moves by exp(new return * dt). This keeps the sigma = 0 fixed point
// (r = 0, C = k0/k2) exact.
SRMRState srmr_step(const SRMRState& state, const SRMRParams& params, double dt,
                    double noise);

// Re-anchors k0 when the process (re)starts from new_level instead of
// old_level, leaving the asymptotic target level unchanged:
// k0' = k0 + k2 log(old_level / new_level).
SRMRParams rebase_initial_level(const SRMRParams& params, double old_level,
                                double new_level);

// Two correlated standard normals from two independent ones:
// w1 = eps1, w2 = rho eps1 + sqrt(1 - rho^2) eps2.
std::pair<double, double> correlated_noise(double rho, double eps1, double eps2);

}  // namespace scoco
