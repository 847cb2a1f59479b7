#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "scoco/rng.hpp"

namespace scoco {

// Descriptive statistics of one regime, levels in basis points and returns in
// per-step (daily) decimals.
struct RegimeSpec {
  int id = 0;
  std::string label;
  double spread_mean = 0.0;
  double spread_stdev = 0.0;
  double return_stdev = 0.0;
};

// A simulated regime path: states[t] is the regime id at step t, states[0]
// being the initial regime. step_days records the calendar step in trading
// days (1 = daily).
struct RegimePath {
  int step_days = 1;
  std::vector<int> states;
};

// Throws unless every entry is >= 0 and every row sums to 1 within 1e-12.
void validate_transition_matrix(const Eigen::MatrixXd& P);

// Fraction of observations spent in each regime. Regimes are 0-based ids;
// n_regimes < 0 infers the count from the largest id present. Throws
// std::invalid_argument("no observations") on an empty sample.
Eigen::VectorXd empirical_stationary(const std::vector<int>& regime_ids,
                                     int n_regimes = -1);

// Solves pi = pi P, sum(pi) = 1. Throws std::runtime_error("stationary
// distribution not unique") when the eigenvalue 1 has multiplicity > 1 within
// 1e-10 (reducible or periodic chain).
Eigen::VectorXd stationary_of(const Eigen::MatrixXd& P);

// Expected consecutive steps spent in regime i: 1 / (1 - p_ii). Throws
// std::invalid_argument("infinite expected duration") when p_ii >= 1.
double expected_duration(const Eigen::MatrixXd& P, int i);

// Shannon entropy -sum p_ij log p_ij (0 log 0 = 0).
double matrix_entropy(const Eigen::MatrixXd& P);

// Default eigenvalue ladder 1 - i * 1e-3 for i = 1..S-1 (the subdominant
// eigenvalues; the unit eigenvalue is implicit).
std::vector<double> default_eigenvalues(int n_regimes);

RegimePath simulate_regimes(const Eigen::MatrixXd& P, int initial_state,
                            int steps, RngStream& stream);
RegimePath simulate_regimes(const Eigen::MatrixXd& P, int initial_state,
                            int steps, std::uint64_t seed);

struct MaxEntropyOptions {
  int starts = 8;           // independent multi-start count
  std::uint64_t seed = 433494437;
  int max_outer = 60;       // multiplier updates
  int max_inner = 400;      // quasi-Newton iterations per outer step
  double constraint_tol = 1e-11;
  double gradient_tol = 1e-9;
};

struct MaxEntropyResult {
  Eigen::MatrixXd P;
  double entropy = 0.0;
  double constraint_violation = 0.0;  // worst equality residual before polish
  int converged_starts = 0;
};

// Maximum-entropy transition matrix with prescribed stationary distribution
// and prescribed subdominant eigenvalues (eigenvalues.size() == S - 1, each in
// (-1, 1)). The unit eigenvalue is implicit. Solved as an augmented
// Lagrangian over (U, V, P) with constraints U V = I, U D V = P and unit row
// sums, a log barrier keeping P positive, analytic gradients, an L-BFGS inner
// loop and multi-start. The returned matrix is polished onto the exact
// constraint manifold, so rows sum to 1 at machine precision and the spectrum
// and stationary vector match the request to ~1e-9.
// Throws std::invalid_argument on malformed input and std::runtime_error when
// no start reaches feasibility (infeasible target/eigenvalue combinations; the
// message carries the best residual).
MaxEntropyResult estimate_max_entropy(const Eigen::VectorXd& stationary_target,
                                      const std::vector<double>& eigenvalues,
                                      const MaxEntropyOptions& options = {});

// Closed form for the 2-state case: p11 = 1 - pi2 (1 - lambda2),
// p22 = 1 - pi1 (1 - lambda2). Feasible iff both diagonals land in [0, 1].
Eigen::MatrixXd two_state_matrix(const Eigen::VectorXd& stationary_target,
                                 double lambda2);

}  // namespace scoco
