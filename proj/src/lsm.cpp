#include "scoco/lsm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "scoco/parallel.hpp"

namespace scoco {

namespace {

struct Column {
  int id = 0;
  Eigen::VectorXd values;
};

// Candidate columns at one step. Standardizing the rate before raising it to
// powers keeps the design well conditioned across maturities and rate levels.
std::vector<Column> candidate_columns(const Eigen::VectorXd& rates,
                                      const std::vector<double>& indicator,
                                      int degree, bool with_indicator) {
  const auto n = rates.size();
  std::vector<Column> cols;
  cols.push_back({0, Eigen::VectorXd::Ones(n)});
  const double mu = rates.mean();
  const double sd = std::sqrt((rates.array() - mu).square().sum() /
                              static_cast<double>(n));
  if (sd > 0.0) {
    const Eigen::VectorXd z = (rates.array() - mu) / sd;
    Eigen::VectorXd zk = Eigen::VectorXd::Ones(n);
    for (int k = 1; k <= degree; ++k) {
      zk = zk.cwiseProduct(z);
      cols.push_back({k, zk});
    }
  }
  if (with_indicator && !indicator.empty()) {
    Eigen::VectorXd ind(n);
    for (Eigen::Index p = 0; p < n; ++p)
      ind(p) = indicator[static_cast<std::size_t>(p)];
    const double imu = ind.mean();
    if ((ind.array() - imu).abs().maxCoeff() > 0.0)
      cols.push_back({degree + 1, ind});
  }
  return cols;
}

// Least squares with rank repair: on deficiency, remove the highest surviving
// rate power, then the indicator, and refit.
RegressionStage fit_stage(int step, std::vector<Column> cols,
                          const Eigen::VectorXd& y, int degree,
                          Eigen::VectorXd* fitted) {
  RegressionStage stage;
  stage.step = step;
  const auto n = y.size();
  std::vector<int> dropped;
  for (;;) {
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
      X.col(static_cast<Eigen::Index>(j)) = cols[j].values;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() == X.cols() || cols.size() <= 1) {
      const Eigen::VectorXd beta = qr.solve(y);
      *fitted = X * beta;
      const Eigen::VectorXd residual = y - *fitted;
      stage.coefficients = beta;
      for (const Column& c : cols) stage.columns.push_back(c.id);
      stage.dropped_columns = dropped;
      const double ss_res = residual.squaredNorm();
      const double ss_tot = (y.array() - y.mean()).square().sum();
      stage.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
      stage.residual_stdev = std::sqrt(ss_res / static_cast<double>(n));
      stage.max_orthogonality =
          (X.transpose() * residual).cwiseAbs().maxCoeff() /
          static_cast<double>(n);
      return stage;
    }
    int drop_id = -1;
    for (const Column& c : cols)
      if (c.id >= 1 && c.id <= degree) drop_id = std::max(drop_id, c.id);
    if (drop_id < 0)
      for (const Column& c : cols)
        if (c.id == degree + 1) drop_id = c.id;
    if (drop_id < 0) drop_id = cols.back().id;
    dropped.push_back(drop_id);
    cols.erase(std::find_if(cols.begin(), cols.end(),
                            [&](const Column& c) { return c.id == drop_id; }));
  }
}

}  // namespace

LsmResult lsm_price(const ScenarioSet& set, const SCoCoSpec& spec,
                    const LsmBasisSpec& basis,
                    std::span<const int> horizon_steps, int threads) {
  const int T = spec.maturity_steps;
  if (T <= 0) throw std::invalid_argument("maturity must be positive");
  if (basis.degree < 0) throw std::invalid_argument("negative basis degree");
  if (spec.dual && !set.has_index)
    throw std::invalid_argument("dual trigger pricing needs index paths");
  const int worst_deferral =
      spec.dual ? std::max(spec.dual->systemic_periods,
                           spec.dual->idiosyncratic_periods)
                : spec.standstill_periods;
  if (set.n_steps < T + worst_deferral)
    throw std::invalid_argument("scenario horizon too short");
  const auto n = static_cast<std::size_t>(set.n_paths());
  if (n < 2) throw std::invalid_argument("too few paths for regression");
  for (int h : horizon_steps)
    if (h < 1 || h > T)
      throw std::invalid_argument("horizon step out of range");
  const double dt = set.dt_years;

  // Standstill schedule of every path, kept as per-step payment flags plus
  // the redemption deferral.
  std::vector<std::uint8_t> pays(n * static_cast<std::size_t>(T + 1), 0);
  std::vector<int> deferral(n, 0);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto pi = static_cast<int>(p);
      const StandstillSchedule schedule =
          spec.dual
              ? build_dual_schedule(set.path_spreads(pi), set.path_index(pi),
                                    spec)
              : build_schedule(set.path_spreads(pi), spec);
      for (int t = 0; t <= T; ++t)
        pays[p * static_cast<std::size_t>(T + 1) + static_cast<std::size_t>(t)] =
            schedule.pays_coupon(t) ? 1 : 0;
      deferral[p] = schedule.deferral_steps;
    }
  });
  const auto pays_at = [&](std::size_t p, int t) {
    return pays[p * static_cast<std::size_t>(T + 1) +
                static_cast<std::size_t>(t)] != 0;
  };

  LsmResult result;

  // Value of deferred redemption at maturity: for each distinct overhang d,
  // regress the observed discount over [T, T+d] on the rate basis at T, over
  // all paths, and read the fit on the paths that carry that overhang.
  std::vector<double> redemption(n, 1.0);
  std::map<int, Eigen::VectorXd> deferred_fits;
  Eigen::VectorXd rates_T(static_cast<Eigen::Index>(n));
  for (std::size_t p = 0; p < n; ++p)
    rates_T(static_cast<Eigen::Index>(p)) =
        set.path_rates(static_cast<int>(p))[static_cast<std::size_t>(T)];
  for (std::size_t p = 0; p < n; ++p) {
    const int d = deferral[p];
    if (d == 0) continue;
    auto it = deferred_fits.find(d);
    if (it == deferred_fits.end()) {
      Eigen::VectorXd y(static_cast<Eigen::Index>(n));
      for (std::size_t q = 0; q < n; ++q) {
        const auto r = set.path_rates(static_cast<int>(q));
        double acc = 0.0;
        for (int u = T; u < T + d; ++u) acc += r[static_cast<std::size_t>(u)];
        y(static_cast<Eigen::Index>(q)) = std::exp(-acc * dt);
      }
      Eigen::VectorXd fitted;
      RegressionStage stage =
          fit_stage(T, candidate_columns(rates_T, {}, basis.degree, false), y,
                    basis.degree, &fitted);
      result.redemption_stages.push_back(std::move(stage));
      it = deferred_fits.emplace(d, std::move(fitted)).first;
    }
    redemption[p] = it->second(static_cast<Eigen::Index>(p));
  }

  std::vector<double> value(n);
  for (std::size_t p = 0; p < n; ++p)
    value[p] = (pays_at(p, T) ? spec.coupon : 0.0) + redemption[p];

  const auto record_distribution = [&](int step,
                                       const std::vector<double>& clean) {
    PriceDistribution dist;
    dist.step = step;
    dist.values = clean;
    dist.stats = summarize(clean);
    result.distributions.push_back(std::move(dist));
  };
  const bool want = [&](int step) {
    return std::find(horizon_steps.begin(), horizon_steps.end(), step) !=
           horizon_steps.end();
  }(T);
  if (want) record_distribution(T, redemption);

  for (int t = T - 1; t >= 1; --t) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    Eigen::VectorXd rates_t(static_cast<Eigen::Index>(n));
    std::vector<double> indicator(n);
    for (std::size_t p = 0; p < n; ++p) {
      const double r = set.path_rates(static_cast<int>(p))[static_cast<std::size_t>(t)];
      rates_t(static_cast<Eigen::Index>(p)) = r;
      y(static_cast<Eigen::Index>(p)) = value[p] * std::exp(-r * dt);
      indicator[p] = pays_at(p, t) ? 1.0 : 0.0;
    }
    Eigen::VectorXd fitted;
    RegressionStage stage = fit_stage(
        t,
        candidate_columns(rates_t, indicator, basis.degree,
                          basis.payment_indicator),
        y, basis.degree, &fitted);
    result.stages.push_back(std::move(stage));
    if (std::find(horizon_steps.begin(), horizon_steps.end(), t) !=
        horizon_steps.end()) {
      std::vector<double> clean(n);
      for (std::size_t p = 0; p < n; ++p)
        clean[p] = fitted(static_cast<Eigen::Index>(p));
      record_distribution(t, clean);
    }
    for (std::size_t p = 0; p < n; ++p)
      value[p] = fitted(static_cast<Eigen::Index>(p)) +
                 (pays_at(p, t) ? spec.coupon : 0.0);
  }

  std::vector<double> discounted(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double r0 = set.path_rates(static_cast<int>(p))[0];
    discounted[p] = value[p] * std::exp(-r0 * dt);
  }
  result.price = mean(discounted);

  std::reverse(result.stages.begin(), result.stages.end());
  std::sort(result.distributions.begin(), result.distributions.end(),
            [](const PriceDistribution& a, const PriceDistribution& b) {
              return a.step < b.step;
            });
  return result;
}

}  // namespace scoco
