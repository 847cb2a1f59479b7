#include "scoco/scenario.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "scoco/parallel.hpp"
#include "scoco/regime_model.hpp"
#include "scoco/rng.hpp"

namespace scoco {

namespace {

// Stream keys: regime chains draw once per regime scenario (inner id 0),
// noise once per (scenario, path). Separate keys per factor keep every
// factor's draws independent of which other factors are being simulated.
constexpr std::uint64_t kSpreadChain = 1;
constexpr std::uint64_t kRateChain = 2;
constexpr std::uint64_t kIndexChain = 3;
constexpr std::uint64_t kSpreadNoise = 10;
constexpr std::uint64_t kRateNoise = 11;
constexpr std::uint64_t kIndexNoise = 12;

struct GridSpec {
  int n_steps = 0;
  int days_per_period = 0;
  int n_days = 0;
};

GridSpec make_grid(const ScenarioConfig& config) {
  if (config.horizon_years <= 0.0)
    throw std::invalid_argument("horizon must be positive");
  if (config.pricing_steps_per_year <= 0 || config.days_per_year <= 0)
    throw std::invalid_argument("grid step counts must be positive");
  if (config.days_per_year % config.pricing_steps_per_year != 0)
    throw std::invalid_argument(
        "pricing steps per year must divide days per year");
  const double steps_real =
      config.horizon_years * config.pricing_steps_per_year;
  const int n_steps = static_cast<int>(std::lround(steps_real));
  if (n_steps <= 0 || std::abs(steps_real - n_steps) > 1e-9)
    throw std::invalid_argument(
        "horizon must be a whole number of pricing periods");
  GridSpec grid;
  grid.n_steps = n_steps;
  grid.days_per_period = config.days_per_year / config.pricing_steps_per_year;
  grid.n_days = n_steps * grid.days_per_period;
  return grid;
}

void validate_factor(const FactorModel& factor, const char* name) {
  const std::string prefix(name);
  if (factor.P.rows() != factor.P.cols() || factor.P.rows() < 1)
    throw std::invalid_argument(prefix + ": transition matrix must be square");
  if (static_cast<int>(factor.targets.size()) != factor.P.rows())
    throw std::invalid_argument(prefix + ": one target set per regime");
  if (factor.initial_regime < 0 || factor.initial_regime >= factor.P.rows())
    throw std::invalid_argument(prefix + ": initial regime out of range");
  if (factor.initial_level + factor.shift <= 0.0)
    throw std::invalid_argument(prefix +
                                ": shifted initial level must be positive");
  if (factor.P.rows() > 1) validate_transition_matrix(factor.P);
}

std::vector<int> build_chain(const FactorModel& factor, int n_days,
                             std::uint64_t seed, int outer,
                             std::uint64_t chain_id) {
  if (factor.P.rows() <= 1) return {};
  RngStream stream(seed, static_cast<std::uint64_t>(outer), 0, chain_id);
  // The walk touches days 0..n_days inclusive, so the chain needs one state
  // per day plus the initial one.
  return simulate_regimes(factor.P, factor.initial_regime, n_days + 1, stream)
      .states;
}

// Daily state of one factor. The quoted series is level - shift; all
// multiplicative dynamics run on the shifted (positive) level. On entering a
// regime the parameters are recalibrated with the prevailing level as the new
// starting point and the cumulative return resets, so the path approaches the
// new regime's target level from wherever it stands; the running return is
// kept so momentum carries across the switch.
struct FactorWalk {
  const FactorModel* model = nullptr;
  const std::vector<int>* chain = nullptr;  // daily regimes; null = static
  SRMRParams params;
  SRMRState state;
  int regime = 0;

  SRMRParams params_for(int r, double level) const {
    MomentTargets t = model->targets[static_cast<std::size_t>(r)];
    t.initial_level = level;
    return calibrate(t);
  }

  void reset() {
    regime = model->initial_regime;
    state.ret = 0.0;
    state.integral = 0.0;
    state.level = model->initial_level + model->shift;
    params = params_for(regime, state.level);
  }

  int regime_at(int day) const {
    return chain ? (*chain)[static_cast<std::size_t>(day)]
                 : model->initial_regime;
  }

  void advance(int day, double noise) {
    const int r = regime_at(day);
    if (r != regime) {
      params = params_for(r, state.level);
      state.integral = 0.0;
      regime = r;
    }
    state = srmr_step(state, params, 1.0, noise);
  }

  double quoted() const { return state.level - model->shift; }
};

// Shared daily loop: generate() records grid days only, simulate_daily()
// records every day. Noise order per day is fixed (rate, spread, index) with
// the spread draw mixed onto the rate draw, so correlation never changes
// which stream a draw comes from.
template <typename Recorder>
void walk_days(const GridSpec& grid, const ScenarioConfig& config,
               FactorWalk& spread, FactorWalk& rate, FactorWalk* index,
               int outer, int inner, Recorder&& record) {
  const auto o = static_cast<std::uint64_t>(outer);
  const auto i = static_cast<std::uint64_t>(inner);
  RngStream rate_noise(config.seed, o, i, kRateNoise);
  RngStream spread_noise(config.seed, o, i, kSpreadNoise);
  RngStream index_noise(config.seed, o, i, kIndexNoise);
  spread.reset();
  rate.reset();
  if (index) index->reset();
  record(0, spread, rate, index);
  for (int day = 1; day <= grid.n_days; ++day) {
    const auto [w_rate, w_spread] = correlated_noise(
        config.rho, rate_noise.normal(), spread_noise.normal());
    rate.advance(day, w_rate);
    spread.advance(day, w_spread);
    if (index) index->advance(day, index_noise.normal());
    record(day, spread, rate, index);
  }
}

void check_counts(const ScenarioConfig& config) {
  if (config.n_regime_scenarios <= 0 || config.n_paths_per_regime <= 0)
    throw std::invalid_argument("scenario and path counts must be positive");
  if (std::abs(config.rho) > 1.0)
    throw std::invalid_argument("correlation must lie in [-1, 1]");
}

constexpr char kCacheMagic[8] = {'S', 'C', 'O', 'C', 'O', 'S', 'E', 'T'};
constexpr std::uint32_t kCacheVersion = 1;

struct CacheHeader {
  char magic[8];
  std::uint32_t version;
  std::uint32_t has_index;
  std::uint64_t n_outer;
  std::uint64_t n_inner;
  std::uint64_t n_steps;
  double dt_years;
};

void write_block(std::ofstream& os, const void* data, std::size_t bytes) {
  os.write(static_cast<const char*>(data),
           static_cast<std::streamsize>(bytes));
}

void read_block(std::ifstream& is, void* data, std::size_t bytes) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!is) throw std::runtime_error("truncated scenario cache");
}

}  // namespace

ScenarioSet generate(const ScenarioConfig& config, const FactorModel& spread,
                     const FactorModel& rate,
                     const std::optional<FactorModel>& index, int threads) {
  const GridSpec grid = make_grid(config);
  check_counts(config);
  validate_factor(spread, "spread");
  validate_factor(rate, "rate");
  if (index) validate_factor(*index, "index");

  ScenarioSet set;
  set.n_outer = config.n_regime_scenarios;
  set.n_inner = config.n_paths_per_regime;
  set.n_steps = grid.n_steps;
  set.dt_years = 1.0 / config.pricing_steps_per_year;
  set.has_index = index.has_value();
  const std::size_t stride = static_cast<std::size_t>(set.stride());
  const std::size_t total = static_cast<std::size_t>(set.n_paths()) * stride;
  set.rates.assign(total, 0.0);
  set.spreads.assign(total, 0.0);
  set.regimes.assign(total, 0);
  if (set.has_index) set.index.assign(total, 0.0);

  std::vector<std::vector<int>> spread_chains(
      static_cast<std::size_t>(set.n_outer));
  std::vector<std::vector<int>> rate_chains(
      static_cast<std::size_t>(set.n_outer));
  std::vector<std::vector<int>> index_chains(
      static_cast<std::size_t>(set.n_outer));
  for (int o = 0; o < set.n_outer; ++o) {
    const auto uo = static_cast<std::size_t>(o);
    spread_chains[uo] =
        build_chain(spread, grid.n_days, config.seed, o, kSpreadChain);
    rate_chains[uo] =
        build_chain(rate, grid.n_days, config.seed, o, kRateChain);
    if (index)
      index_chains[uo] =
          build_chain(*index, grid.n_days, config.seed, o, kIndexChain);
  }

  parallel_for(
      static_cast<std::size_t>(set.n_paths()), threads,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
          const int o = static_cast<int>(p) / set.n_inner;
          const int i = static_cast<int>(p) % set.n_inner;
          const auto uo = static_cast<std::size_t>(o);
          FactorWalk sw;
          sw.model = &spread;
          sw.chain = spread_chains[uo].empty() ? nullptr : &spread_chains[uo];
          FactorWalk rw;
          rw.model = &rate;
          rw.chain = rate_chains[uo].empty() ? nullptr : &rate_chains[uo];
          FactorWalk iw;
          FactorWalk* iww = nullptr;
          if (index) {
            iw.model = &*index;
            iw.chain = index_chains[uo].empty() ? nullptr : &index_chains[uo];
            iww = &iw;
          }
          const std::size_t base = p * stride;
          walk_days(grid, config, sw, rw, iww, o, i,
                    [&](int day, const FactorWalk& s, const FactorWalk& r,
                        const FactorWalk* ix) {
                      if (day % grid.days_per_period != 0) return;
                      const auto step =
                          static_cast<std::size_t>(day / grid.days_per_period);
                      set.spreads[base + step] = s.quoted();
                      set.rates[base + step] = r.quoted();
                      if (ix) set.index[base + step] = ix->quoted();
                      set.regimes[base + step] =
                          static_cast<std::int16_t>(s.regime);
                    });
        }
      });
  return set;
}

DailyScenario simulate_daily(const ScenarioConfig& config,
                             const FactorModel& spread, const FactorModel& rate,
                             const std::optional<FactorModel>& index, int outer,
                             int inner) {
  const GridSpec grid = make_grid(config);
  check_counts(config);
  validate_factor(spread, "spread");
  validate_factor(rate, "rate");
  if (index) validate_factor(*index, "index");
  if (outer < 0 || outer >= config.n_regime_scenarios || inner < 0 ||
      inner >= config.n_paths_per_regime)
    throw std::invalid_argument("scenario or path index out of range");

  const std::vector<int> spread_chain =
      build_chain(spread, grid.n_days, config.seed, outer, kSpreadChain);
  const std::vector<int> rate_chain =
      build_chain(rate, grid.n_days, config.seed, outer, kRateChain);
  std::vector<int> index_chain;
  if (index)
    index_chain =
        build_chain(*index, grid.n_days, config.seed, outer, kIndexChain);

  FactorWalk sw;
  sw.model = &spread;
  sw.chain = spread_chain.empty() ? nullptr : &spread_chain;
  FactorWalk rw;
  rw.model = &rate;
  rw.chain = rate_chain.empty() ? nullptr : &rate_chain;
  FactorWalk iw;
  FactorWalk* iww = nullptr;
  if (index) {
    iw.model = &*index;
    iw.chain = index_chain.empty() ? nullptr : &index_chain;
    iww = &iw;
  }

  DailyScenario out;
  const auto n = static_cast<std::size_t>(grid.n_days) + 1;
  out.spreads.reserve(n);
  out.rates.reserve(n);
  out.regimes.reserve(n);
  if (index) out.index.reserve(n);
  walk_days(grid, config, sw, rw, iww, outer, inner,
            [&](int, const FactorWalk& s, const FactorWalk& r,
                const FactorWalk* ix) {
              out.spreads.push_back(s.quoted());
              out.rates.push_back(r.quoted());
              if (ix) out.index.push_back(ix->quoted());
              out.regimes.push_back(s.regime);
            });
  return out;
}

MomentTargets weighted_average_targets(std::span<const MomentTargets> targets,
                                       std::span<const double> weights) {
  if (targets.empty() || targets.size() != weights.size())
    throw std::invalid_argument("targets and weights must match and be nonempty");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("weights must be nonnegative");
    wsum += w;
  }
  if (wsum <= 0.0) throw std::invalid_argument("weights must not all vanish");
  MomentTargets avg;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double w = weights[i] / wsum;
    avg.level_mean += w * targets[i].level_mean;
    avg.level_stdev += w * targets[i].level_stdev;
    avg.return_stdev += w * targets[i].return_stdev;
    avg.sq_change_mean += w * targets[i].sq_change_mean;
    avg.initial_level += w * targets[i].initial_level;
  }
  return avg;
}

FactorModel regime_off_variant(const FactorModel& factor,
                               const MomentTargets& fixed_targets) {
  FactorModel off;
  off.P = Eigen::MatrixXd::Ones(1, 1);
  off.targets = {fixed_targets};
  off.initial_regime = 0;
  off.initial_level = factor.initial_level;
  off.shift = factor.shift;
  return off;
}

void write_scenario_cache(const ScenarioSet& set, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open scenario cache for writing: " + path);
  CacheHeader header{};
  std::memcpy(header.magic, kCacheMagic, sizeof(kCacheMagic));
  header.version = kCacheVersion;
  header.has_index = set.has_index ? 1 : 0;
  header.n_outer = static_cast<std::uint64_t>(set.n_outer);
  header.n_inner = static_cast<std::uint64_t>(set.n_inner);
  header.n_steps = static_cast<std::uint64_t>(set.n_steps);
  header.dt_years = set.dt_years;
  write_block(os, &header, sizeof(header));
  const std::size_t total =
      static_cast<std::size_t>(set.n_paths()) * static_cast<std::size_t>(set.stride());
  if (set.rates.size() != total || set.spreads.size() != total ||
      set.regimes.size() != total || (set.has_index && set.index.size() != total))
    throw std::invalid_argument("scenario set arrays have inconsistent sizes");
  write_block(os, set.rates.data(), total * sizeof(double));
  write_block(os, set.spreads.data(), total * sizeof(double));
  if (set.has_index) write_block(os, set.index.data(), total * sizeof(double));
  std::vector<double> regimes(total);
  for (std::size_t k = 0; k < total; ++k)
    regimes[k] = static_cast<double>(set.regimes[k]);
  write_block(os, regimes.data(), total * sizeof(double));
  if (!os) throw std::runtime_error("failed writing scenario cache: " + path);
}

ScenarioSet read_scenario_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open scenario cache: " + path);
  CacheHeader header{};
  read_block(is, &header, sizeof(header));
  if (std::memcmp(header.magic, kCacheMagic, sizeof(kCacheMagic)) != 0 ||
      header.version != kCacheVersion)
    throw std::runtime_error("bad scenario cache header: " + path);
  ScenarioSet set;
  set.n_outer = static_cast<int>(header.n_outer);
  set.n_inner = static_cast<int>(header.n_inner);
  set.n_steps = static_cast<int>(header.n_steps);
  set.dt_years = header.dt_years;
  set.has_index = header.has_index != 0;
  if (set.n_outer <= 0 || set.n_inner <= 0 || set.n_steps <= 0)
    throw std::runtime_error("bad scenario cache header: " + path);
  const std::size_t total =
      static_cast<std::size_t>(set.n_paths()) * static_cast<std::size_t>(set.stride());
  set.rates.resize(total);
  set.spreads.resize(total);
  read_block(is, set.rates.data(), total * sizeof(double));
  read_block(is, set.spreads.data(), total * sizeof(double));
  if (set.has_index) {
    set.index.resize(total);
    read_block(is, set.index.data(), total * sizeof(double));
  }
  std::vector<double> regimes(total);
  read_block(is, regimes.data(), total * sizeof(double));
  set.regimes.resize(total);
  for (std::size_t k = 0; k < total; ++k)
    set.regimes[k] = static_cast<std::int16_t>(regimes[k]);
  return set;
}

void scenarios_to_csv(const ScenarioSet& set, std::ostream& os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "path,step,rate,spread";
  if (set.has_index) os << ",index";
  os << ",regime\n";
  for (int p = 0; p < set.n_paths(); ++p) {
    const std::size_t base =
        static_cast<std::size_t>(p) * static_cast<std::size_t>(set.stride());
    for (int t = 0; t <= set.n_steps; ++t) {
      const std::size_t k = base + static_cast<std::size_t>(t);
      os << p << ',' << t << ',' << set.rates[k] << ',' << set.spreads[k];
      if (set.has_index) os << ',' << set.index[k];
      os << ',' << set.regimes[k] << '\n';
    }
  }
}

}  // namespace scoco
