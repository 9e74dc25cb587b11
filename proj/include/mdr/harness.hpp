#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdr/bsvt.hpp"
#include "mdr/gauss_source.hpp"
#include "mdr/lmmse.hpp"
#include "mdr/opta.hpp"
#include "mdr/sampling.hpp"
#include "mdr/svt.hpp"

namespace mdr {

enum class Method { lmmse, svt, bsvt };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// "exact" or a positive signal-to-mismatch ratio.
struct SmrLevel {
  bool exact = true;
  double value = 0.0;

  std::string label() const;
};

enum class SamplingModel { uniform, markov };

/// One sweep definition; parsed from a flat key = value file.
struct ExperimentConfig {
  int n_rows = 200;
  int n_cols = 200;
  double mean_value = 240.0;  // constant mean vector, volts-like scale
  double variance = 4.0;
  double rho = 0.9;
  std::string covariance_file;  // overrides variance/rho when set
  std::string mean_file;        // overrides mean_value when set
  double snr_db = 20.0;
  std::vector<double> gamma_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<Method> methods = {Method::lmmse, Method::svt, Method::bsvt};
  std::vector<SmrLevel> smr_levels = {SmrLevel{}};
  SamplingModel sampling = SamplingModel::uniform;
  double markov_l0 = 1.0;
  MarkovCalibration markov_calibration = MarkovCalibration::paper;
  MismatchMode mismatch_mode = MismatchMode::normalized;
  int repeats = 20;
  std::uint64_t base_seed = 1;
  SvtConfig svt;
  double bsvt_step = 1.2;
  double bsvt_tolerance = 1e-4;
  int bsvt_max_iterations = 500;
  int bsvt_grid = 512;
  CapacityUnits capacity_units = CapacityUnits::nats;
  bool emit_opta = false;
  bool record_timing = true;
  std::string out = "results.csv";

  void validate() const;

  /// Source statistics resolved from the inline parameters or the CSV files.
  GaussianSourceSpec source_spec() const;

  /// Stable 64-bit hash of the parsed configuration (used in emitted file names).
  std::uint64_t stable_hash() const;
  std::string sampling_label() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// ||M - Mhat||_F^2 / ||M||_F^2.
double nmse(const StateMatrix& truth, const StateMatrix& estimate);

struct RunResult {
  double gamma = 0.0;
  Method method = Method::lmmse;
  SmrLevel smr;
  std::string sampling;
  int repeat = 0;
  double nmse = 0.0;
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
  std::uint64_t cell_checksum = 0;  // over (M, mask, observations); not serialized
};

struct AggregateRow {
  double gamma = 0.0;
  Method method = Method::lmmse;
  SmrLevel smr;
  std::string sampling;
  double mean_nmse = 0.0;
  double std_nmse = 0.0;
  int count = 0;
};

struct OptaPoint {
  double gamma = 0.0;
  double bound = 0.0;
};

struct SweepOutput {
  std::vector<RunResult> rows;        // canonical order: gamma, method, smr, repeat
  std::vector<AggregateRow> aggregates;
  std::vector<OptaPoint> opta;        // filled when config.emit_opta
};

/// Runs the full sweep. Every method and SMR level within one (gamma, repeat)
/// cell consumes the identical (M, mask, observations); child seeds derive
/// from (base_seed, gamma index, repeat index) so results are independent of
/// the thread schedule.
SweepOutput run_sweep(const ExperimentConfig& config, int threads = 1);

/// Mean OPTA bound per gamma over the same seeded cells as the sweep.
std::vector<OptaPoint> opta_curve(const ExperimentConfig& config);

std::vector<AggregateRow> aggregate_results(const std::vector<RunResult>& rows);

/// Results CSV with the fixed header
/// gamma,method,smr,sampling,repeat,nmse,iterations,converged,seconds.
void write_results_csv(const std::string& path, const std::vector<RunResult>& rows);
std::vector<RunResult> read_results_csv(const std::string& path);
std::string results_csv_text(const std::vector<RunResult>& rows);

void write_aggregates_csv(const std::string& path,
                          const std::vector<AggregateRow>& aggregates);

/// Plot-ready series file: gamma,series,mean_nmse,std_nmse (one row per
/// point; the OPTA bound appears as series "opta" when supplied).
void emit_plot_data(const std::string& path, const std::vector<AggregateRow>& aggregates,
                    const std::vector<OptaPoint>& bound);

void write_opta_csv(const std::string& path, const std::vector<OptaPoint>& curve);

}  // namespace mdr
