#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scoco/instrument.hpp"
#include "scoco/regime_model.hpp"
#include "scoco/rng.hpp"
#include "scoco/scenario.hpp"
#include "scoco/stats.hpp"

namespace scoco {

// Dirichlet perturbation of a probability vector: component i of a draw is
// Gamma(concentration * base_i) normalized over the vector, so the draws
// center on base and tighten as concentration grows.
struct DirichletSpec {
  Eigen::VectorXd base;
  double concentration = 10.0;
  int n_samples = 0;
};

// Draws that contain a component below 1e-9 are discarded (they would make
// downstream estimation singular); rejected, when given, receives the count.
std::vector<Eigen::VectorXd> sample_dirichlet(const DirichletSpec& spec,
                                              RngStream& stream,
                                              int* rejected = nullptr);

// Everything needed to reprice the bond under a perturbed stationary
// distribution: the spread factor's transition matrix is re-estimated for
// each sampled vector (holding the subdominant eigenvalues fixed; empty means
// the default ladder) and scenarios are regenerated under the same seed, so
// price differences across samples come from the stationary vector alone.
struct RepriceSetup {
  FactorModel spread;
  FactorModel rate;
  ScenarioConfig config;
  SCoCoSpec spec;
  std::vector<double> eigenvalues;
  MaxEntropyOptions max_entropy;
};

struct RepriceSample {
  Eigen::VectorXd stationary;
  double price = 0.0;
  double par = 0.0;
  bool ok = false;
  std::string error;
};

struct RepriceSummary {
  std::vector<RepriceSample> samples;
  int n_failed = 0;
  int n_rejected_draws = 0;
  SummaryStats price_stats;  // over successful samples
  SummaryStats par_stats;
};

// Throws std::runtime_error when every sample fails; individual failures
// (re-estimation or calibration) are recorded and skipped.
RepriceSummary reprice_under(const RepriceSetup& setup,
                             const DirichletSpec& dirichlet, int threads = 1);

}  // namespace scoco
