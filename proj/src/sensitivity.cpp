#include "scoco/sensitivity.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

#include "scoco/pricing.hpp"

namespace scoco {

namespace {

constexpr double kMinComponent = 1e-9;
constexpr std::uint64_t kDirichletStream = 0x64697269;  // perturbation draws

void validate_dirichlet(const DirichletSpec& spec) {
  if (spec.base.size() < 1)
    throw std::invalid_argument("empty base distribution");
  if (std::abs(spec.base.sum() - 1.0) > 1e-8)
    throw std::invalid_argument("base distribution must sum to 1");
  for (Eigen::Index i = 0; i < spec.base.size(); ++i)
    if (spec.base(i) <= 0.0)
      throw std::invalid_argument("base distribution must be positive");
  if (spec.concentration <= 0.0)
    throw std::invalid_argument("concentration must be positive");
  if (spec.n_samples <= 0)
    throw std::invalid_argument("sample count must be positive");
}

}  // namespace

std::vector<Eigen::VectorXd> sample_dirichlet(const DirichletSpec& spec,
                                              RngStream& stream,
                                              int* rejected) {
  validate_dirichlet(spec);
  const Eigen::Index s = spec.base.size();
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(static_cast<std::size_t>(spec.n_samples));
  int discarded = 0;
  const long max_attempts = 1000L + 100L * spec.n_samples;
  long attempts = 0;
  while (static_cast<int>(draws.size()) < spec.n_samples) {
    if (++attempts > max_attempts)
      throw std::runtime_error("dirichlet sampling stalled (shape too small)");
    Eigen::VectorXd g(s);
    for (Eigen::Index i = 0; i < s; ++i)
      g(i) = stream.gamma(spec.concentration * spec.base(i));
    const double total = g.sum();
    if (!(total > 0.0)) {
      ++discarded;
      continue;
    }
    g /= total;
    if (g.minCoeff() < kMinComponent) {
      ++discarded;
      continue;
    }
    draws.push_back(std::move(g));
  }
  if (rejected) *rejected = discarded;
  return draws;
}

RepriceSummary reprice_under(const RepriceSetup& setup,
                             const DirichletSpec& dirichlet, int threads) {
  if (setup.spread.P.rows() != dirichlet.base.size())
    throw std::invalid_argument(
        "base distribution size does not match the spread regime count");
  std::vector<double> eigenvalues = setup.eigenvalues;
  if (eigenvalues.empty())
    eigenvalues = default_eigenvalues(static_cast<int>(dirichlet.base.size()));

  RngStream stream(setup.config.seed, kDirichletStream);
  RepriceSummary summary;
  const std::vector<Eigen::VectorXd> draws =
      sample_dirichlet(dirichlet, stream, &summary.n_rejected_draws);

  summary.samples.reserve(draws.size());
  std::vector<double> prices;
  std::vector<double> pars;
  for (const Eigen::VectorXd& pi : draws) {
    RepriceSample sample;
    sample.stationary = pi;
    try {
      const MaxEntropyResult estimated =
          estimate_max_entropy(pi, eigenvalues, setup.max_entropy);
      FactorModel spread = setup.spread;
      spread.P = estimated.P;
      // Same seed for every sample: scenario noise is common across the
      // perturbations, isolating the effect of the stationary vector.
      const ScenarioSet set =
          generate(setup.config, spread, setup.rate, std::nullopt, threads);
      const CashflowDecomposition parts =
          decompose_cashflows(set, setup.spec, threads);
      sample.price =
          price_from_decomposition(parts, setup.spec.coupon).price;
      sample.par = par_rate_from_decomposition(parts);
      sample.ok = true;
      prices.push_back(sample.price);
      pars.push_back(sample.par);
    } catch (const std::exception& e) {
      sample.ok = false;
      sample.error = e.what();
      ++summary.n_failed;
    }
    summary.samples.push_back(std::move(sample));
  }
  if (prices.empty())
    throw std::runtime_error("all sensitivity repricings failed");
  summary.price_stats = summarize(prices);
  summary.par_stats = summarize(pars);
  return summary;
}

}  // namespace scoco
