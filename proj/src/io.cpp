#include "scoco/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "scoco/pricing.hpp"
#include "scoco/sensitivity.hpp"
#include "scoco/stats.hpp"
#include "scoco/version.hpp"

namespace scoco {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void line_error(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(path + ": line " + std::to_string(line) + ": " +
                           what);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool looks_like_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (std::isdigit(static_cast<unsigned char>(s[i])) == 0) return false;
  return true;
}

double parse_double(const std::string& field, const std::string& path,
                    std::size_t line) {
  if (field.empty()) line_error(path, line, "empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size())
    line_error(path, line, "bad numeric value '" + field + "'");
  if (!std::isfinite(v))
    line_error(path, line, "non-finite value '" + field + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

void set_precision(std::ostream& os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object())
    throw std::runtime_error("config section " + where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw std::runtime_error("unknown config key '" + it.key() + "' in " +
                               where);
  }
}

std::vector<double> to_doubles(const json& j, const std::string& where) {
  if (!j.is_array())
    throw std::runtime_error("config key " + where + " must be an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(x.get<double>());
  return out;
}

json stats_json(const SummaryStats& s, double scale = 1.0) {
  return json{{"mean", s.mean * scale},       {"stdev", s.stdev * scale},
              {"median", s.median * scale},   {"q05", s.q05 * scale},
              {"q25", s.q25 * scale},         {"q75", s.q75 * scale},
              {"q95", s.q95 * scale},
              {"iqr", (s.q75 - s.q25) * scale}};
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json targets_json(const MomentTargets& t) {
  return json{{"level_mean", t.level_mean},
              {"level_stdev", t.level_stdev},
              {"return_stdev", t.return_stdev},
              {"sq_change_mean", t.sq_change_mean},
              {"initial_level", t.initial_level}};
}

}  // namespace

HistoricalSeries read_series_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open series file: " + path);
  HistoricalSeries series;
  series.label = fs::path(path).stem().string();
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
  ++lineno;
  strip_cr(line);
  if (line.rfind("\xef\xbb\xbf", 0) == 0) line.erase(0, 3);
  if (line != "date,value")
    line_error(path, lineno, "expected header 'date,value'");
  while (std::getline(is, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 2)
      line_error(path, lineno, "expected 2 fields, got " +
                                   std::to_string(fields.size()));
    if (!looks_like_date(fields[0]))
      line_error(path, lineno, "bad date '" + fields[0] + "'");
    if (!series.dates.empty() && fields[0] <= series.dates.back())
      line_error(path, lineno, "dates must be strictly increasing");
    series.dates.push_back(fields[0]);
    series.values.push_back(parse_double(fields[1], path, lineno));
  }
  if (series.dates.empty())
    throw std::runtime_error(path + ": no observations");
  return series;
}

void write_series_csv(const HistoricalSeries& series, std::ostream& os) {
  set_precision(os);
  os << "date,value\n";
  for (std::size_t i = 0; i < series.dates.size(); ++i)
    os << series.dates[i] << ',' << series.values[i] << '\n';
}

std::vector<IngestRow> ingest(const HistoricalSeries& series,
                              const std::vector<std::string>& breakpoints) {
  const std::size_t n = series.values.size();
  if (n == 0 || series.dates.size() != n)
    throw std::invalid_argument("empty or inconsistent series");
  for (std::size_t i = 0; i < n; ++i) {
    if (series.values[i] <= 0.0)
      throw std::invalid_argument("nonpositive value at " + series.dates[i]);
    if (i > 0 && series.dates[i] <= series.dates[i - 1])
      throw std::invalid_argument("dates must be strictly increasing");
  }
  std::vector<std::size_t> starts{0};
  std::string prev;
  for (const std::string& b : breakpoints) {
    if (!looks_like_date(b))
      throw std::invalid_argument("bad breakpoint date '" + b + "'");
    if (!prev.empty() && b <= prev)
      throw std::invalid_argument("breakpoints must be strictly increasing");
    prev = b;
    if (b <= series.dates.front() || b > series.dates.back())
      throw std::invalid_argument("breakpoint out of range: " + b);
    const auto it =
        std::lower_bound(series.dates.begin(), series.dates.end(), b);
    const auto idx = static_cast<std::size_t>(it - series.dates.begin());
    if (idx == starts.back())
      throw std::invalid_argument("empty segment at breakpoint " + b);
    starts.push_back(idx);
  }
  starts.push_back(n);

  std::vector<IngestRow> rows;
  for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
    const std::size_t s = starts[k];
    const std::size_t e = starts[k + 1];
    IngestRow row;
    row.n_obs = static_cast<int>(e - s);
    try {
      row.targets = estimate_moments(
          std::span<const double>(series.values.data() + s, e - s));
    } catch (const std::exception& ex) {
      throw std::invalid_argument("segment " + std::to_string(k) + " [" +
                                  series.dates[s] + ".." +
                                  series.dates[e - 1] + "]: " + ex.what());
    }
    row.degenerate = row.targets.level_stdev == 0.0 ||
                     row.targets.return_stdev == 0.0 ||
                     row.targets.sq_change_mean == 0.0;
    row.spec.id = static_cast<int>(k);
    row.spec.label = series.dates[s] + ".." + series.dates[e - 1];
    row.spec.spread_mean = row.targets.level_mean;
    row.spec.spread_stdev = row.targets.level_stdev;
    row.spec.return_stdev = row.targets.return_stdev;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

MomentTargets targets_from_json(const json& j, double level_scale,
                                double shift, double return_scale,
                                const std::string& where) {
  check_keys(j,
             {"label", "level_mean", "level_stdev", "return_stdev",
              "smoothness", "sq_change_mean"},
             where);
  MomentTargets t;
  t.level_mean = j.at("level_mean").get<double>() * level_scale + shift;
  t.level_stdev = j.at("level_stdev").get<double>() * level_scale;
  t.return_stdev = j.at("return_stdev").get<double>() * return_scale;
  const char* smooth_key =
      j.contains("smoothness") ? "smoothness" : "sq_change_mean";
  t.sq_change_mean =
      j.at(smooth_key).get<double>() * return_scale * return_scale;
  t.initial_level = t.level_mean;
  return t;
}

FactorConfig parse_factor(const json& j, const std::string& name,
                          const fs::path& base_dir) {
  check_keys(j,
             {"series", "breakpoints", "regimes", "stationary", "eigenvalues",
              "initial_level", "initial_regime", "shift", "level_scale",
              "return_stdev_units"},
             name);
  FactorConfig factor;
  factor.name = name;
  factor.level_scale = j.value("level_scale", 1.0);
  if (factor.level_scale <= 0.0)
    throw std::runtime_error(name + ": level_scale must be positive");
  factor.shift = j.value("shift", 0.0) * factor.level_scale;
  const std::string units = j.value("return_stdev_units", "decimal");
  double return_scale = 1.0;
  if (units == "percent")
    return_scale = 0.01;
  else if (units != "decimal")
    throw std::runtime_error(
        name + ": return_stdev_units must be 'percent' or 'decimal'");

  const bool has_series = j.contains("series");
  const bool has_regimes = j.contains("regimes");
  if (has_series == has_regimes)
    throw std::runtime_error(name +
                             ": exactly one of 'series' or 'regimes' required");

  if (has_series) {
    const fs::path rel = j.at("series").get<std::string>();
    const fs::path resolved = rel.is_absolute() ? rel : base_dir / rel;
    factor.series_path = resolved.string();
    HistoricalSeries series = read_series_csv(factor.series_path);
    for (double& v : series.values) v = v * factor.level_scale + factor.shift;
    if (j.contains("breakpoints"))
      for (const auto& b : j.at("breakpoints"))
        factor.breakpoints.push_back(b.get<std::string>());
    factor.rows = ingest(series, factor.breakpoints);
    double total = 0.0;
    for (const IngestRow& row : factor.rows) {
      factor.targets.push_back(row.targets);
      total += row.n_obs;
    }
    factor.stationary.resize(static_cast<Eigen::Index>(factor.rows.size()));
    for (std::size_t k = 0; k < factor.rows.size(); ++k)
      factor.stationary(static_cast<Eigen::Index>(k)) =
          factor.rows[k].n_obs / total;
    factor.initial_regime = static_cast<int>(factor.rows.size()) - 1;
    factor.initial_level = series.values.back() - factor.shift;
  } else {
    if (!j.at("regimes").is_array() || j.at("regimes").empty())
      throw std::runtime_error(name + ": regimes must be a nonempty array");
    int k = 0;
    for (const auto& r : j.at("regimes")) {
      factor.targets.push_back(
          targets_from_json(r, factor.level_scale, factor.shift, return_scale,
                            name + ".regimes[" + std::to_string(k) + "]"));
      ++k;
    }
    factor.initial_regime = 0;
  }

  if (j.contains("stationary")) {
    const std::vector<double> pi = to_doubles(j.at("stationary"), name + ".stationary");
    factor.stationary.resize(static_cast<Eigen::Index>(pi.size()));
    for (std::size_t i = 0; i < pi.size(); ++i)
      factor.stationary(static_cast<Eigen::Index>(i)) = pi[i];
  }
  if (factor.targets.size() > 1) {
    if (factor.stationary.size() == 0)
      throw std::runtime_error(
          name + ": stationary distribution required with explicit regimes");
    if (factor.stationary.size() !=
        static_cast<Eigen::Index>(factor.targets.size()))
      throw std::runtime_error(name +
                               ": stationary size must match regime count");
    if (std::abs(factor.stationary.sum() - 1.0) > 1e-6)
      throw std::runtime_error(name + ": stationary must sum to 1");
    for (Eigen::Index i = 0; i < factor.stationary.size(); ++i)
      if (factor.stationary(i) <= 0.0)
        throw std::runtime_error(name + ": stationary must be positive");
  } else if (factor.stationary.size() == 0) {
    factor.stationary = Eigen::VectorXd::Ones(1);
  }

  if (j.contains("eigenvalues"))
    factor.eigenvalues = to_doubles(j.at("eigenvalues"), name + ".eigenvalues");
  if (factor.targets.size() > 1 && !factor.eigenvalues.empty() &&
      factor.eigenvalues.size() != factor.targets.size() - 1)
    throw std::runtime_error(name + ": need one eigenvalue per regime minus 1");

  if (j.contains("initial_regime"))
    factor.initial_regime = j.at("initial_regime").get<int>();
  if (factor.initial_regime < 0 ||
      factor.initial_regime >= static_cast<int>(factor.targets.size()))
    throw std::runtime_error(name + ": initial_regime out of range");
  if (j.contains("initial_level"))
    factor.initial_level =
        j.at("initial_level").get<double>() * factor.level_scale;
  else if (!has_series)
    factor.initial_level =
        factor.targets[static_cast<std::size_t>(factor.initial_regime)]
            .level_mean -
        factor.shift;
  if (factor.initial_level + factor.shift <= 0.0)
    throw std::runtime_error(name + ": shifted initial level must be positive");
  return factor;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::exception& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  try {
    check_keys(j,
               {"seed", "threads", "output_dir", "spread", "rate", "index",
                "scenario", "instrument", "pricing", "lsm", "sensitivity"},
               "top level");
    RunConfig config;
    config.config_path = path;
    config.seed = j.value("seed", std::uint64_t{0});
    config.threads = j.value("threads", 0);
    const fs::path base_dir = fs::path(path).parent_path();
    const fs::path out = j.value("output_dir", std::string("out"));
    config.output_dir =
        (out.is_absolute() ? out : base_dir / out).string();

    config.spread = parse_factor(j.at("spread"), "spread", base_dir);
    config.rate = parse_factor(j.at("rate"), "rate", base_dir);
    if (j.contains("index"))
      config.index = parse_factor(j.at("index"), "index", base_dir);

    const json& sc = j.at("scenario");
    check_keys(sc,
               {"n_regime_scenarios", "n_paths_per_regime", "horizon_years",
                "pricing_steps_per_year", "days_per_year", "rho"},
               "scenario");
    config.scenario.n_regime_scenarios =
        sc.at("n_regime_scenarios").get<int>();
    config.scenario.n_paths_per_regime =
        sc.at("n_paths_per_regime").get<int>();
    config.scenario.horizon_years = sc.at("horizon_years").get<double>();
    config.scenario.pricing_steps_per_year =
        sc.value("pricing_steps_per_year", 2);
    config.scenario.days_per_year = sc.value("days_per_year", 252);
    config.scenario.rho = sc.value("rho", 0.0);
    config.scenario.seed = config.seed;

    if (j.contains("instrument")) {
      const json& in = j.at("instrument");
      check_keys(in,
                 {"maturity_years", "annual_coupon", "spread_threshold",
                  "standstill_periods", "dual"},
                 "instrument");
      config.has_instrument = true;
      const double maturity_years = in.at("maturity_years").get<double>();
      const double steps_real =
          maturity_years * config.scenario.pricing_steps_per_year;
      const int steps = static_cast<int>(std::lround(steps_real));
      if (steps <= 0 || std::abs(steps_real - steps) > 1e-9)
        throw std::runtime_error(
            "maturity_years must be a whole number of pricing periods");
      config.instrument.maturity_steps = steps;
      config.annual_coupon = in.value("annual_coupon", 0.0);
      config.instrument.coupon =
          config.annual_coupon / config.scenario.pricing_steps_per_year;
      config.instrument.spread_threshold =
          in.at("spread_threshold").get<double>();
      config.instrument.standstill_periods =
          in.at("standstill_periods").get<int>();
      if (in.contains("dual")) {
        const json& d = in.at("dual");
        check_keys(d,
                   {"index_threshold", "systemic_periods",
                    "idiosyncratic_periods"},
                   "instrument.dual");
        DualTriggerSpec dual;
        dual.index_threshold = d.at("index_threshold").get<double>();
        dual.systemic_periods = d.at("systemic_periods").get<int>();
        dual.idiosyncratic_periods = d.at("idiosyncratic_periods").get<int>();
        config.instrument.dual = dual;
      }
    }

    if (j.contains("pricing")) {
      check_keys(j.at("pricing"), {"thresholds"}, "pricing");
      config.par_thresholds =
          to_doubles(j.at("pricing").at("thresholds"), "pricing.thresholds");
    }

    if (j.contains("lsm")) {
      const json& l = j.at("lsm");
      check_keys(l, {"degree", "payment_indicator", "horizon_years"}, "lsm");
      config.lsm.enabled = true;
      config.lsm.basis.degree = l.value("degree", 1);
      config.lsm.basis.payment_indicator = l.value("payment_indicator", true);
      if (l.contains("horizon_years"))
        config.lsm.horizon_years =
            to_doubles(l.at("horizon_years"), "lsm.horizon_years");
    }

    if (j.contains("sensitivity")) {
      const json& s = j.at("sensitivity");
      check_keys(s, {"alphas", "alpha", "samples"}, "sensitivity");
      config.sensitivity.enabled = true;
      if (s.contains("alphas"))
        config.sensitivity.alphas = to_doubles(s.at("alphas"), "sensitivity.alphas");
      else if (s.contains("alpha"))
        config.sensitivity.alphas = {s.at("alpha").get<double>()};
      else
        throw std::runtime_error("sensitivity: alphas required");
      config.sensitivity.samples = s.at("samples").get<int>();
    }
    return config;
  } catch (const json::exception& e) {
    throw std::runtime_error("config error in " + path + ": " + e.what());
  }
}

EstimatedFactor estimate_factor(const FactorConfig& factor,
                                const MaxEntropyOptions& options) {
  EstimatedFactor out;
  out.model.targets = factor.targets;
  out.model.initial_regime = factor.initial_regime;
  out.model.initial_level = factor.initial_level;
  out.model.shift = factor.shift;
  if (!factor.multi_regime()) {
    out.model.P = Eigen::MatrixXd::Ones(1, 1);
    out.estimated = false;
    return out;
  }
  std::vector<double> eigenvalues = factor.eigenvalues;
  if (eigenvalues.empty())
    eigenvalues = default_eigenvalues(static_cast<int>(factor.targets.size()));
  out.estimate = estimate_max_entropy(factor.stationary, eigenvalues, options);
  out.model.P = out.estimate.P;
  out.estimated = true;
  return out;
}

std::uint64_t fnv1a_bytes(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open file for hashing: " + path);
  std::uint64_t hash = 14695981039346656037ULL;
  char buffer[65536];
  while (is) {
    is.read(buffer, sizeof(buffer));
    const std::streamsize got = is.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

void write_matrix_csv(const Eigen::MatrixXd& P, std::ostream& os) {
  set_precision(os);
  os << "from,to,prob\n";
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      os << i << ',' << j << ',' << P(i, j) << '\n';
}

Eigen::MatrixXd read_matrix_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line))
    throw std::runtime_error("matrix csv: empty input");
  ++lineno;
  strip_cr(line);
  if (line != "from,to,prob")
    line_error("matrix csv", lineno, "expected header 'from,to,prob'");
  struct Entry {
    int from, to;
    double prob;
  };
  std::vector<Entry> entries;
  int max_index = -1;
  while (std::getline(is, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 3)
      line_error("matrix csv", lineno, "expected 3 fields");
    Entry e{};
    e.from = static_cast<int>(parse_double(fields[0], "matrix csv", lineno));
    e.to = static_cast<int>(parse_double(fields[1], "matrix csv", lineno));
    e.prob = parse_double(fields[2], "matrix csv", lineno);
    if (e.from < 0 || e.to < 0)
      line_error("matrix csv", lineno, "negative state index");
    max_index = std::max({max_index, e.from, e.to});
    entries.push_back(e);
  }
  const int s = max_index + 1;
  if (s <= 0 || static_cast<int>(entries.size()) != s * s)
    throw std::runtime_error("matrix csv: incomplete matrix");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(s, s);
  for (const Entry& e : entries) P(e.from, e.to) = e.prob;
  return P;
}

void schedules_to_csv(const ScenarioSet& set, const SCoCoSpec& spec,
                      std::ostream& os) {
  const auto family_of = [&](const StandstillSchedule& schedule, int t) {
    for (const auto& [a, b] : schedule.spread_intervals)
      if (t >= a && t <= b) return spec.dual ? "systemic" : "spread";
    for (const auto& [a, b] : schedule.idio_intervals)
      if (t >= a && t <= b) return "idiosyncratic";
    return "";
  };
  os << "path,step,in_standstill,family\n";
  for (int p = 0; p < set.n_paths(); ++p) {
    const StandstillSchedule schedule =
        spec.dual ? build_dual_schedule(set.path_spreads(p), set.path_index(p),
                                        spec)
                  : build_schedule(set.path_spreads(p), spec);
    for (int t = 0; t <= spec.maturity_steps; ++t)
      os << p << ',' << t << ',' << (schedule.pays_coupon(t) ? 0 : 1) << ','
         << family_of(schedule, t) << '\n';
  }
}

namespace {

json factor_estimate_json(const FactorConfig& factor,
                          const EstimatedFactor& estimated) {
  json f;
  f["name"] = factor.name;
  f["n_regimes"] = factor.targets.size();
  f["stationary_target"] = vector_json(factor.stationary);
  if (!factor.rows.empty()) {
    json rows = json::array();
    for (const IngestRow& row : factor.rows)
      rows.push_back(json{{"id", row.spec.id},
                          {"label", row.spec.label},
                          {"n_obs", row.n_obs},
                          {"degenerate", row.degenerate},
                          {"targets", targets_json(row.targets)}});
    f["segments"] = std::move(rows);
  }
  if (estimated.estimated) {
    f["eigenvalues"] = factor.eigenvalues.empty()
                           ? json(default_eigenvalues(
                                 static_cast<int>(factor.targets.size())))
                           : json(factor.eigenvalues);
    f["entropy"] = estimated.estimate.entropy;
    f["constraint_violation"] = estimated.estimate.constraint_violation;
    f["converged_starts"] = estimated.estimate.converged_starts;
    f["achieved_stationary"] = vector_json(stationary_of(estimated.model.P));
    f["matrix"] = matrix_json(estimated.model.P);
  }
  return f;
}

}  // namespace

std::vector<std::string> run_pipeline(const RunConfig& config,
                                      const PipelineSelection& selection) {
  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);
  std::vector<std::string> files;

  const auto write_json_file = [&](const std::string& name, const json& j) {
    std::ofstream os(out_dir / name);
    if (!os) throw std::runtime_error("cannot write " + name);
    os << j.dump(2) << '\n';
    files.push_back(name);
  };
  const auto stage = [](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("stage ") + name +
                               " failed: " + e.what());
    }
  };

  EstimatedFactor spread_est;
  EstimatedFactor rate_est;
  std::optional<EstimatedFactor> index_est;
  stage("estimate", [&] {
    spread_est = estimate_factor(config.spread);
    rate_est = estimate_factor(config.rate);
    if (config.index) index_est = estimate_factor(*config.index);
    if (!selection.estimate) return;
    json report;
    report["factors"] = json::array();
    const auto emit = [&](const FactorConfig& factor,
                          const EstimatedFactor& est) {
      report["factors"].push_back(factor_estimate_json(factor, est));
      if (est.estimated) {
        const std::string name = "transition_" + factor.name + ".csv";
        std::ofstream os(out_dir / name);
        if (!os) throw std::runtime_error("cannot write " + name);
        write_matrix_csv(est.model.P, os);
        files.push_back(name);
      }
    };
    emit(config.spread, spread_est);
    emit(config.rate, rate_est);
    if (config.index) emit(*config.index, *index_est);
    write_json_file("estimate.json", report);
  });

  stage("calibrate", [&] {
    if (!selection.calibrate) return;
    json report;
    report["factors"] = json::array();
    const auto emit = [&](const FactorConfig& factor) {
      json f;
      f["name"] = factor.name;
      f["regimes"] = json::array();
      for (std::size_t r = 0; r < factor.targets.size(); ++r) {
        json entry;
        entry["regime"] = r;
        entry["targets"] = targets_json(factor.targets[r]);
        try {
          const SRMRParams params = calibrate(factor.targets[r]);
          entry["params"] = json{{"k0", params.k0},
                                 {"k1", params.k1},
                                 {"k2", params.k2},
                                 {"sigma", params.sigma}};
          entry["residual"] = moment_residual(params, factor.targets[r]);
        } catch (const std::exception& e) {
          entry["error"] = e.what();
        }
        f["regimes"].push_back(std::move(entry));
      }
      report["factors"].push_back(std::move(f));
    };
    emit(config.spread);
    emit(config.rate);
    if (config.index) emit(*config.index);
    write_json_file("calibration.json", report);
  });

  ScenarioSet set;
  bool have_set = false;
  const auto need_set = [&] {
    if (have_set) return;
    std::optional<FactorModel> index_model;
    if (index_est) index_model = index_est->model;
    set = generate(config.scenario, spread_est.model, rate_est.model,
                   index_model, config.threads);
    have_set = true;
  };

  stage("simulate", [&] {
    if (!(selection.simulate || selection.scenario_csv || selection.schedules ||
          selection.price || selection.par ||
          (selection.lsm && config.lsm.enabled)))
      return;
    need_set();
    if (selection.simulate) {
      write_scenario_cache(set, (out_dir / "scenarios.bin").string());
      files.push_back("scenarios.bin");
    }
    if (selection.scenario_csv) {
      std::ofstream os(out_dir / "scenarios.csv");
      if (!os) throw std::runtime_error("cannot write scenarios.csv");
      scenarios_to_csv(set, os);
      files.push_back("scenarios.csv");
    }
    if (selection.schedules) {
      if (!config.has_instrument)
        throw std::runtime_error("instrument block missing");
      std::ofstream os(out_dir / "schedules.csv");
      if (!os) throw std::runtime_error("cannot write schedules.csv");
      schedules_to_csv(set, config.instrument, os);
      files.push_back("schedules.csv");
    }
  });

  stage("price", [&] {
    if (!selection.price || !config.has_instrument) return;
    need_set();
    const CashflowDecomposition parts =
        decompose_cashflows(set, config.instrument, config.threads);
    const PriceResult result =
        price_from_decomposition(parts, config.instrument.coupon);
    json report;
    report["price"] = result.price;
    report["std_error"] = result.std_error;
    report["annual_coupon"] = config.annual_coupon;
    report["coupon_per_period"] = config.instrument.coupon;
    report["maturity_steps"] = config.instrument.maturity_steps;
    report["spread_threshold"] = config.instrument.spread_threshold;
    report["standstill_periods"] = config.instrument.standstill_periods;
    report["n_paths"] = set.n_paths();
    report["mean_annuity"] = result.mean_annuity;
    report["mean_principal"] = result.mean_principal;
    report["mean_deferral_steps"] = result.mean_deferral_steps;
    report["mean_suspended_steps"] = result.mean_suspended_steps;
    try {
      report["par_rate_annual"] = par_rate_from_decomposition(parts) *
                                  config.scenario.pricing_steps_per_year;
    } catch (const std::exception& e) {
      report["par_rate_error"] = e.what();
    }
    if (config.instrument.dual) {
      report["dual"] = json{
          {"index_threshold", config.instrument.dual->index_threshold},
          {"systemic_periods", config.instrument.dual->systemic_periods},
          {"idiosyncratic_periods",
           config.instrument.dual->idiosyncratic_periods}};
    }
    write_json_file("price.json", report);
  });

  stage("par-rate", [&] {
    if (!selection.par || !config.has_instrument) return;
    need_set();
    std::vector<double> thresholds = config.par_thresholds;
    if (thresholds.empty())
      thresholds = {config.instrument.spread_threshold};
    std::ofstream os(out_dir / "par_rates.csv");
    if (!os) throw std::runtime_error("cannot write par_rates.csv");
    set_precision(os);
    os << "threshold,par_rate\n";
    json rows = json::array();
    for (double threshold : thresholds) {
      SCoCoSpec spec = config.instrument;
      spec.spread_threshold = threshold;
      const double par = par_rate(set, spec, config.threads) *
                         config.scenario.pricing_steps_per_year;
      os << threshold << ',' << par << '\n';
      rows.push_back(json{{"threshold", threshold}, {"par_rate", par}});
    }
    files.push_back("par_rates.csv");
    write_json_file("par_rates.json", json{{"par_rates", rows}});
  });

  stage("lsm", [&] {
    if (!selection.lsm || !config.lsm.enabled || !config.has_instrument)
      return;
    need_set();
    std::vector<int> horizon_steps;
    for (double h : config.lsm.horizon_years) {
      const double real = h * config.scenario.pricing_steps_per_year;
      const int step = static_cast<int>(std::lround(real));
      if (std::abs(real - step) > 1e-9)
        throw std::runtime_error(
            "lsm horizon must be a whole number of pricing periods");
      horizon_steps.push_back(step);
    }
    const LsmResult result = lsm_price(set, config.instrument,
                                       config.lsm.basis, horizon_steps,
                                       config.threads);
    json report;
    report["price"] = result.price;
    report["basis_degree"] = config.lsm.basis.degree;
    report["payment_indicator"] = config.lsm.basis.payment_indicator;
    report["stages"] = json::array();
    const auto stage_json = [](const RegressionStage& s) {
      return json{{"step", s.step},
                  {"columns", s.columns},
                  {"dropped_columns", s.dropped_columns},
                  {"r_squared", s.r_squared},
                  {"residual_stdev", s.residual_stdev},
                  {"max_orthogonality", s.max_orthogonality}};
    };
    for (const RegressionStage& s : result.stages)
      report["stages"].push_back(stage_json(s));
    report["redemption_stages"] = json::array();
    for (const RegressionStage& s : result.redemption_stages)
      report["redemption_stages"].push_back(stage_json(s));
    report["distributions"] = json::array();
    std::ofstream os(out_dir / "lsm_distributions.csv");
    if (!os) throw std::runtime_error("cannot write lsm_distributions.csv");
    set_precision(os);
    os << "scenario,horizon,price\n";
    for (const PriceDistribution& dist : result.distributions) {
      const double years =
          dist.step /
          static_cast<double>(config.scenario.pricing_steps_per_year);
      report["distributions"].push_back(json{
          {"step", dist.step}, {"horizon_years", years},
          {"stats", stats_json(dist.stats)}});
      for (std::size_t p = 0; p < dist.values.size(); ++p)
        os << p << ',' << years << ',' << dist.values[p] << '\n';
    }
    files.push_back("lsm_distributions.csv");
    write_json_file("lsm.json", report);
  });

  stage("sensitivity", [&] {
    if (!selection.sensitivity || !config.sensitivity.enabled ||
        !config.has_instrument)
      return;
    if (config.instrument.dual)
      throw std::runtime_error(
          "sensitivity supports single-trigger instruments only");
    if (!config.spread.multi_regime())
      throw std::runtime_error(
          "sensitivity needs a multi-regime spread factor");
    if (config.sensitivity.samples <= 0)
      throw std::runtime_error("sensitivity sample count must be positive");
    RepriceSetup setup;
    setup.spread = spread_est.model;
    setup.rate = rate_est.model;
    setup.config = config.scenario;
    setup.spec = config.instrument;
    setup.eigenvalues = config.spread.eigenvalues;

    const double spy = config.scenario.pricing_steps_per_year;
    const auto s = static_cast<Eigen::Index>(config.spread.targets.size());
    std::ofstream os(out_dir / "sensitivity.csv");
    if (!os) throw std::runtime_error("cannot write sensitivity.csv");
    set_precision(os);
    os << "alpha,sample";
    for (Eigen::Index i = 0; i < s; ++i) os << ",pi_" << i;
    os << ",price,par_rate_annual,ok,error\n";

    json summary;
    summary["alphas"] = json::array();
    for (double alpha : config.sensitivity.alphas) {
      DirichletSpec dirichlet;
      dirichlet.base = config.spread.stationary;
      dirichlet.concentration = alpha;
      dirichlet.n_samples = config.sensitivity.samples;
      const RepriceSummary result =
          reprice_under(setup, dirichlet, config.threads);
      for (std::size_t k = 0; k < result.samples.size(); ++k) {
        const RepriceSample& sample = result.samples[k];
        os << alpha << ',' << k;
        for (Eigen::Index i = 0; i < s; ++i) os << ',' << sample.stationary(i);
        std::string error = sample.error;
        std::replace(error.begin(), error.end(), ',', ';');
        os << ',' << sample.price << ',' << sample.par * spy << ','
           << (sample.ok ? 1 : 0) << ',' << error << '\n';
      }
      summary["alphas"].push_back(
          json{{"alpha", alpha},
               {"samples", config.sensitivity.samples},
               {"n_failed", result.n_failed},
               {"n_rejected_draws", result.n_rejected_draws},
               {"price", stats_json(result.price_stats)},
               {"par_rate_annual", stats_json(result.par_stats, spy)}});
    }
    files.push_back("sensitivity.csv");
    write_json_file("sensitivity.json", summary);
  });

  stage("manifest", [&] {
    if (!selection.manifest) return;
    json manifest;
    manifest["version"] = kVersion;
    manifest["seed"] = config.seed;
    manifest["config"] =
        json{{"file", fs::path(config.config_path).filename().string()},
             {"hash", hex64(fnv1a_file(config.config_path))}};
    json inputs = json::object();
    const auto add_input = [&](const FactorConfig& factor) {
      if (factor.series_path.empty()) return;
      inputs[factor.name] =
          json{{"file", fs::path(factor.series_path).filename().string()},
               {"hash", hex64(fnv1a_file(factor.series_path))}};
    };
    add_input(config.spread);
    add_input(config.rate);
    if (config.index) add_input(*config.index);
    manifest["inputs"] = std::move(inputs);
    json outputs = json::object();
    for (const std::string& name : files)
      outputs[name] = hex64(fnv1a_file((out_dir / name).string()));
    manifest["outputs"] = std::move(outputs);
    write_json_file("manifest.json", manifest);
  });

  return files;
}

}  // namespace scoco
