#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scoco/instrument.hpp"
#include "scoco/lsm.hpp"
#include "scoco/regime_model.hpp"
#include "scoco/scenario.hpp"
#include "scoco/srmr.hpp"

namespace scoco {

// Daily observations of one quoted series. Dates are ISO-8601 strings
// (YYYY-MM-DD), strictly increasing; each row is one trading day.
struct HistoricalSeries {
  std::string label;
  std::vector<std::string> dates;
  std::vector<double> values;
};

// CSV with header "date,value". Parse errors carry the 1-based line number.
HistoricalSeries read_series_csv(const std::string& path);
void write_series_csv(const HistoricalSeries& series, std::ostream& os);

// One regime recovered from a series segment.
struct IngestRow {
  RegimeSpec spec;
  MomentTargets targets;
  int n_obs = 0;
  bool degenerate = false;  // zero level or return variance in the segment
};

// Splits the series at the breakpoints (each breakpoint is the first date of
// the segment it opens; segments are half-open) and measures each segment.
// Requires strictly positive values, breakpoints strictly inside the date
// range in increasing order, and at least 3 observations per segment.
std::vector<IngestRow> ingest(const HistoricalSeries& series,
                              const std::vector<std::string>& breakpoints);

// Resolved per-factor configuration: moment targets per regime plus the
// stationary target and eigenvalues driving transition-matrix estimation.
struct FactorConfig {
  std::string name;
  std::string series_path;  // empty when regimes were given directly
  std::vector<std::string> breakpoints;
  std::vector<IngestRow> rows;
  std::vector<MomentTargets> targets;
  Eigen::VectorXd stationary;
  std::vector<double> eigenvalues;
  double initial_level = 0.0;
  int initial_regime = 0;
  double shift = 0.0;
  double level_scale = 1.0;

  bool multi_regime() const { return targets.size() > 1; }
};

struct LsmConfig {
  bool enabled = false;
  LsmBasisSpec basis;
  std::vector<double> horizon_years;
};

struct SensitivityConfig {
  bool enabled = false;
  std::vector<double> alphas;
  int samples = 0;
};

// A full run description, loaded from JSON. Series paths resolve relative to
// the config file. Instrument maturity and coupon are annual in the file and
// converted to the pricing grid here (coupon per period, maturity in steps).
struct RunConfig {
  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output_dir;
  FactorConfig spread;
  FactorConfig rate;
  std::optional<FactorConfig> index;
  ScenarioConfig scenario;
  bool has_instrument = false;
  SCoCoSpec instrument;
  double annual_coupon = 0.0;
  std::vector<double> par_thresholds;
  LsmConfig lsm;
  SensitivityConfig sensitivity;
};

RunConfig load_config(const std::string& path);

// Transition-matrix estimation for one factor; single-regime factors get the
// identity 1x1 matrix without touching the solver.
struct EstimatedFactor {
  FactorModel model;
  bool estimated = false;
  MaxEntropyResult estimate;  // valid when estimated
};
EstimatedFactor estimate_factor(const FactorConfig& factor,
                                const MaxEntropyOptions& options = {});

// 64-bit FNV-1a, printed as 16 hex digits in manifests.
std::uint64_t fnv1a_bytes(const void* data, std::size_t size);
std::uint64_t fnv1a_file(const std::string& path);
std::string hex64(std::uint64_t value);

// Row-major transition matrix CSV with header "from,to,prob".
void write_matrix_csv(const Eigen::MatrixXd& P, std::ostream& os);
Eigen::MatrixXd read_matrix_csv(std::istream& is);

// Standstill audit export: "path,step,in_standstill,family" per grid step.
void schedules_to_csv(const ScenarioSet& set, const SCoCoSpec& spec,
                      std::ostream& os);

struct PipelineSelection {
  bool estimate = false;
  bool calibrate = false;
  bool simulate = false;
  bool scenario_csv = false;
  bool schedules = false;
  bool price = false;
  bool par = false;
  bool lsm = false;
  bool sensitivity = false;
  bool manifest = false;

  static PipelineSelection all() {
    return {true, true, true, false, false, true, true, true, true, true};
  }
};

// Executes the selected stages in order (estimate, calibrate, simulate,
// price, par sweep, lsm, sensitivity, manifest), writing artifacts into
// config.output_dir and returning the files written, relative to that
// directory. A stage failure is rethrown as "stage <name> failed: <cause>".
// Stages that need a missing config block (say lsm without an lsm section)
// are skipped.
std::vector<std::string> run_pipeline(const RunConfig& config,
                                      const PipelineSelection& selection);

}  // namespace scoco
