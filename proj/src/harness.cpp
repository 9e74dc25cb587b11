#include "mdr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mdr/csv.hpp"

namespace mdr {

std::string method_name(Method m) {
  switch (m) {
    case Method::lmmse: return "lmmse";
    case Method::svt: return "svt";
    case Method::bsvt: return "bsvt";
  }
  throw std::logic_error("unreachable");
}

Method method_from_name(const std::string& name) {
  if (name == "lmmse") return Method::lmmse;
  if (name == "svt") return Method::svt;
  if (name == "bsvt") return Method::bsvt;
  throw std::invalid_argument("unknown method: " + name);
}

std::string SmrLevel::label() const { return exact ? "exact" : fmt_double(value); }

namespace {

SmrLevel smr_from_label(const std::string& label) {
  if (label == "exact") return SmrLevel{};
  const double v = parse_double(label);
  if (!(v > 0.0)) throw std::invalid_argument("smr must be positive: " + label);
  return SmrLevel{false, v};
}

int smr_rank(const SmrLevel& s) { return s.exact ? 0 : 1; }

// exact first, then descending smr (closest to exact statistics first)
bool smr_less(const SmrLevel& a, const SmrLevel& b) {
  if (smr_rank(a) != smr_rank(b)) return smr_rank(a) < smr_rank(b);
  return a.value > b.value;
}

bool smr_equal(const SmrLevel& a, const SmrLevel& b) {
  return a.exact == b.exact && (a.exact || a.value == b.value);
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_double(std::uint64_t& h, double v) { fnv_bytes(h, &v, sizeof(v)); }
void fnv_int(std::uint64_t& h, long long v) { fnv_bytes(h, &v, sizeof(v)); }
void fnv_string(std::uint64_t& h, const std::string& s) { fnv_bytes(h, s.data(), s.size()); }

}  // namespace

void ExperimentConfig::validate() const {
  if (n_rows < 1 || n_cols < 1)
    throw std::invalid_argument("n_rows and n_cols must be positive");
  if (covariance_file.empty()) {
    if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must be in [0, 1)");
  }
  if (gamma_grid.empty()) throw std::invalid_argument("gamma_grid must be non-empty");
  for (size_t i = 0; i < gamma_grid.size(); ++i) {
    if (!(gamma_grid[i] >= 0.0 && gamma_grid[i] < 1.0))
      throw std::invalid_argument("gamma values must lie in [0, 1)");
    if (i > 0 && gamma_grid[i] <= gamma_grid[i - 1])
      throw std::invalid_argument("gamma_grid must be sorted and distinct");
  }
  if (methods.empty()) throw std::invalid_argument("methods must be non-empty");
  for (size_t i = 0; i < methods.size(); ++i)
    for (size_t j = i + 1; j < methods.size(); ++j)
      if (methods[i] == methods[j]) throw std::invalid_argument("duplicate method");
  if (smr_levels.empty()) throw std::invalid_argument("smr_levels must be non-empty");
  for (const auto& s : smr_levels)
    if (!s.exact && !(s.value > 0.0))
      throw std::invalid_argument("smr levels must be positive");
  if (sampling == SamplingModel::markov) {
    if (!(markov_l0 >= 1.0)) throw std::invalid_argument("markov_l0 must be at least 1");
    for (double g : gamma_grid)
      if (!(g > 0.0))
        throw std::invalid_argument("markov sampling requires gamma in (0, 1)");
  }
  if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  svt.validate();
  if (!(bsvt_step > 0.0 && bsvt_step < 2.0))
    throw std::invalid_argument("bsvt_step must be in (0, 2)");
  if (!(bsvt_tolerance > 0.0)) throw std::invalid_argument("bsvt_tol must be positive");
  if (bsvt_max_iterations < 1)
    throw std::invalid_argument("bsvt_max_iter must be at least 1");
  if (bsvt_grid < 2) throw std::invalid_argument("bsvt_grid must be at least 2");
}

GaussianSourceSpec ExperimentConfig::source_spec() const {
  GaussianSourceSpec spec;
  if (!covariance_file.empty()) {
    spec.covariance = read_matrix_csv(covariance_file);
    if (spec.covariance.rows() != n_rows)
      throw std::invalid_argument("covariance file dimension does not match n_rows");
  } else {
    spec.covariance = synthetic_covariance(n_rows, variance, rho);
  }
  if (!mean_file.empty()) {
    spec.mean = read_vector_csv(mean_file);
    if (spec.mean.size() != n_rows)
      throw std::invalid_argument("mean file length does not match n_rows");
  } else {
    spec.mean = Eigen::VectorXd::Constant(n_rows, mean_value);
  }
  return spec;
}

std::string ExperimentConfig::sampling_label() const {
  return sampling == SamplingModel::uniform ? "uniform" : "markov";
}

std::uint64_t ExperimentConfig::stable_hash() const {
  std::uint64_t h = kFnvOffset;
  fnv_int(h, n_rows);
  fnv_int(h, n_cols);
  fnv_double(h, mean_value);
  fnv_double(h, variance);
  fnv_double(h, rho);
  fnv_string(h, covariance_file);
  fnv_string(h, mean_file);
  fnv_double(h, snr_db);
  for (double g : gamma_grid) fnv_double(h, g);
  for (Method m : methods) fnv_string(h, method_name(m));
  for (const auto& s : smr_levels) fnv_string(h, s.label());
  fnv_string(h, sampling_label());
  fnv_double(h, markov_l0);
  fnv_int(h, markov_calibration == MarkovCalibration::paper ? 0 : 1);
  fnv_int(h, mismatch_mode == MismatchMode::normalized ? 0 : 1);
  fnv_int(h, repeats);
  fnv_int(h, static_cast<long long>(base_seed));
  fnv_double(h, svt.tau ? *svt.tau : -1.0);
  fnv_double(h, svt.step_size);
  fnv_double(h, svt.tolerance);
  fnv_int(h, svt.max_iterations);
  fnv_double(h, bsvt_step);
  fnv_double(h, bsvt_tolerance);
  fnv_int(h, bsvt_max_iterations);
  fnv_int(h, bsvt_grid);
  fnv_int(h, capacity_units == CapacityUnits::nats ? 0 : 1);
  return h;
}

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (auto& piece : split_csv_line(value)) {
    const std::string t = trim(piece);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw std::invalid_argument("expected a boolean, got: " + v);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "n_rows") {
      cfg.n_rows = static_cast<int>(parse_int(value));
    } else if (key == "n_cols") {
      cfg.n_cols = static_cast<int>(parse_int(value));
    } else if (key == "mean_value") {
      cfg.mean_value = parse_double(value);
    } else if (key == "variance") {
      cfg.variance = parse_double(value);
    } else if (key == "rho") {
      cfg.rho = parse_double(value);
    } else if (key == "covariance_file") {
      cfg.covariance_file = value;
    } else if (key == "mean_file") {
      cfg.mean_file = value;
    } else if (key == "snr_db") {
      cfg.snr_db = parse_double(value);
    } else if (key == "gamma_grid") {
      cfg.gamma_grid.clear();
      for (auto& t : split_list(value)) cfg.gamma_grid.push_back(parse_double(t));
    } else if (key == "methods") {
      cfg.methods.clear();
      for (auto& t : split_list(value)) cfg.methods.push_back(method_from_name(t));
    } else if (key == "smr_levels") {
      cfg.smr_levels.clear();
      for (auto& t : split_list(value)) cfg.smr_levels.push_back(smr_from_label(t));
    } else if (key == "sampling") {
      if (value == "uniform") cfg.sampling = SamplingModel::uniform;
      else if (value == "markov") cfg.sampling = SamplingModel::markov;
      else throw std::invalid_argument("unknown sampling model: " + value);
    } else if (key == "markov_l0") {
      cfg.markov_l0 = parse_double(value);
    } else if (key == "markov_calibration") {
      if (value == "paper") cfg.markov_calibration = MarkovCalibration::paper;
      else if (value == "geometric") cfg.markov_calibration = MarkovCalibration::geometric;
      else throw std::invalid_argument("unknown markov calibration: " + value);
    } else if (key == "mismatch_mode") {
      if (value == "normalized") cfg.mismatch_mode = MismatchMode::normalized;
      else if (value == "paper-literal") cfg.mismatch_mode = MismatchMode::paper_literal;
      else throw std::invalid_argument("unknown mismatch mode: " + value);
    } else if (key == "repeats") {
      cfg.repeats = static_cast<int>(parse_int(value));
    } else if (key == "base_seed") {
      cfg.base_seed = static_cast<std::uint64_t>(parse_int(value));
    } else if (key == "svt_tau") {
      if (value.empty() || value == "default") cfg.svt.tau.reset();
      else cfg.svt.tau = parse_double(value);
    } else if (key == "svt_step") {
      cfg.svt.step_size = parse_double(value);
    } else if (key == "svt_tol") {
      cfg.svt.tolerance = parse_double(value);
    } else if (key == "svt_max_iter") {
      cfg.svt.max_iterations = static_cast<int>(parse_int(value));
    } else if (key == "bsvt_step") {
      cfg.bsvt_step = parse_double(value);
    } else if (key == "bsvt_tol") {
      cfg.bsvt_tolerance = parse_double(value);
    } else if (key == "bsvt_max_iter") {
      cfg.bsvt_max_iterations = static_cast<int>(parse_int(value));
    } else if (key == "bsvt_grid") {
      cfg.bsvt_grid = static_cast<int>(parse_int(value));
    } else if (key == "capacity_units") {
      if (value == "nats") cfg.capacity_units = CapacityUnits::nats;
      else if (value == "log10") cfg.capacity_units = CapacityUnits::log10;
      else throw std::invalid_argument("unknown capacity units: " + value);
    } else if (key == "emit_opta") {
      cfg.emit_opta = parse_bool(value);
    } else if (key == "record_timing") {
      cfg.record_timing = parse_bool(value);
    } else if (key == "out") {
      cfg.out = value;
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

double nmse(const StateMatrix& truth, const StateMatrix& estimate) {
  if (truth.values.rows() != estimate.values.rows() ||
      truth.values.cols() != estimate.values.cols())
    throw std::invalid_argument("nmse shapes must match");
  const double energy = truth.values.squaredNorm();
  if (!(energy > 0.0)) throw std::invalid_argument("ground truth has zero energy");
  return (truth.values - estimate.values).squaredNorm() / energy;
}

namespace {

struct CellData {
  double gamma = 0.0;
  StateMatrix truth;
  ObservationMask mask;
  NoisyObservations obs;
  std::uint64_t checksum = 0;
};

std::uint64_t cell_checksum(const CellData& cell) {
  std::uint64_t h = kFnvOffset;
  const auto& v = cell.truth.values;
  fnv_bytes(h, v.data(), sizeof(double) * static_cast<size_t>(v.size()));
  for (int j = 0; j < cell.mask.n_cols; ++j) {
    for (int i : cell.mask.observed[static_cast<size_t>(j)]) fnv_int(h, i);
    for (double x : cell.obs.values[static_cast<size_t>(j)]) fnv_double(h, x);
  }
  return h;
}

CellData realize_cell(const ExperimentConfig& cfg, const GaussianSourceSpec& spec,
                      const std::vector<MarkovSamplerParams>& markov_params,
                      double sigma2, size_t gamma_index, int repeat) {
  const std::uint64_t child =
      derive_seed(cfg.base_seed, {static_cast<std::uint64_t>(gamma_index),
                                  static_cast<std::uint64_t>(repeat)});
  CellData cell;
  cell.gamma = cfg.gamma_grid[gamma_index];
  auto source_rng = make_stream(derive_seed(child, {1}));
  cell.truth = sample_source(spec, cfg.n_cols, source_rng);
  auto mask_rng = make_stream(derive_seed(child, {2}));
  cell.mask = cfg.sampling == SamplingModel::uniform
                  ? uniform_mask(cfg.n_rows, cfg.n_cols, cell.gamma, mask_rng)
                  : markov_mask(cfg.n_rows, cfg.n_cols, markov_params[gamma_index],
                                mask_rng);
  auto noise_rng = make_stream(derive_seed(child, {3}));
  cell.obs = acquire(cell.truth, cell.mask, sigma2, noise_rng);
  cell.checksum = cell_checksum(cell);
  return cell;
}

Eigen::MatrixXd level_covariance(const ExperimentConfig& cfg,
                                 const GaussianSourceSpec& spec, const SmrLevel& level,
                                 std::uint64_t child, size_t level_index) {
  if (level.exact) return spec.covariance;
  auto rng = make_stream(derive_seed(child, {4, static_cast<std::uint64_t>(level_index)}));
  return mismatch_covariance(spec.covariance, level.value, rng, cfg.mismatch_mode);
}

int method_order(Method m) {
  switch (m) {
    case Method::lmmse: return 0;
    case Method::svt: return 1;
    case Method::bsvt: return 2;
  }
  return 3;
}

void sort_canonical(std::vector<RunResult>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const RunResult& a, const RunResult& b) {
    if (a.gamma != b.gamma) return a.gamma < b.gamma;
    if (method_order(a.method) != method_order(b.method))
      return method_order(a.method) < method_order(b.method);
    if (!smr_equal(a.smr, b.smr)) return smr_less(a.smr, b.smr);
    return a.repeat < b.repeat;
  });
}

}  // namespace

SweepOutput run_sweep(const ExperimentConfig& config, int threads) {
  config.validate();
  const GaussianSourceSpec spec = config.source_spec();
  spec.validate();
  const double sigma2 = sigma_from_snr(spec.covariance, config.snr_db);

  std::vector<MarkovSamplerParams> markov_params;
  if (config.sampling == SamplingModel::markov)
    for (double g : config.gamma_grid)
      markov_params.push_back(
          markov_params_from_targets(g, config.markov_l0, config.markov_calibration));

  const size_t n_gamma = config.gamma_grid.size();
  const size_t n_cells = n_gamma * static_cast<size_t>(config.repeats);
  std::vector<std::vector<RunResult>> cell_rows(n_cells);
  std::vector<double> cell_bound(n_cells, 0.0);

  auto run_cell = [&](size_t cell_index) {
    const size_t gi = cell_index / static_cast<size_t>(config.repeats);
    const int rep = static_cast<int>(cell_index % static_cast<size_t>(config.repeats));
    const std::uint64_t child =
        derive_seed(config.base_seed,
                    {static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(rep)});
    const CellData cell = realize_cell(config, spec, markov_params, sigma2, gi, rep);

    if (config.emit_opta)
      cell_bound[cell_index] =
          opta_nmse(spec.covariance, cell.mask.observed_count(), config.n_rows,
                    config.n_cols, config.snr_db, cell.truth.squared_norm(),
                    config.capacity_units);

    auto& rows = cell_rows[cell_index];
    auto record = [&](Method method, const SmrLevel& level, auto&& runner) {
      RunResult r;
      r.gamma = cell.gamma;
      r.method = method;
      r.smr = level;
      r.sampling = config.sampling_label();
      r.repeat = rep;
      r.cell_checksum = cell.checksum;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        runner(r);
      } catch (const std::exception& e) {
        r.failed = true;
        r.error = e.what();
        r.nmse = std::numeric_limits<double>::quiet_NaN();
        r.iterations = 0;
        r.converged = false;
      }
      const auto t1 = std::chrono::steady_clock::now();
      r.seconds =
          config.record_timing ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
      rows.push_back(std::move(r));
    };

    for (Method method : config.methods) {
      if (method == Method::svt) {
        // statistics-free: one run per cell, recorded under the exact label
        record(Method::svt, SmrLevel{}, [&](RunResult& r) {
          const SvtResult res = svt_recover(cell.obs, config.svt);
          r.nmse = nmse(cell.truth, res.estimate);
          r.iterations = res.iterations;
          r.converged = res.converged;
        });
        continue;
      }
      for (size_t li = 0; li < config.smr_levels.size(); ++li) {
        const SmrLevel& level = config.smr_levels[li];
        const Eigen::MatrixXd cov = level_covariance(config, spec, level, child, li);
        LmmseModel model{spec.mean, cov, sigma2};
        if (method == Method::lmmse) {
          record(Method::lmmse, level, [&](RunResult& r) {
            const StateMatrix est = lmmse_recover(cell.obs, model);
            r.nmse = nmse(cell.truth, est);
            r.iterations = 0;
            r.converged = true;
          });
        } else {
          record(Method::bsvt, level, [&](RunResult& r) {
            BsvtConfig bc;
            bc.step_size = config.bsvt_step;
            bc.tolerance = config.bsvt_tolerance;
            bc.max_iterations = config.bsvt_max_iterations;
            bc.threshold_grid_size = config.bsvt_grid;
            bc.lmmse_model = model;
            const BsvtResult res = bsvt_recover(cell.obs, bc);
            r.nmse = nmse(cell.truth, res.estimate);
            r.iterations = res.iterations;
            r.converged = res.converged;
          });
        }
      }
    }
  };

  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(n_cells)));
  if (n_workers == 1) {
    for (size_t c = 0; c < n_cells; ++c) run_cell(c);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const size_t c = next.fetch_add(1);
          if (c >= n_cells) return;
          run_cell(c);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  SweepOutput out;
  for (auto& rows : cell_rows)
    for (auto& r : rows) out.rows.push_back(std::move(r));
  sort_canonical(out.rows);
  out.aggregates = aggregate_results(out.rows);
  if (config.emit_opta) {
    for (size_t gi = 0; gi < n_gamma; ++gi) {
      double sum = 0.0;
      for (int rep = 0; rep < config.repeats; ++rep)
        sum += cell_bound[gi * static_cast<size_t>(config.repeats) +
                          static_cast<size_t>(rep)];
      out.opta.push_back({config.gamma_grid[gi], sum / config.repeats});
    }
  }
  return out;
}

std::vector<OptaPoint> opta_curve(const ExperimentConfig& config) {
  config.validate();
  const GaussianSourceSpec spec = config.source_spec();
  spec.validate();
  const double sigma2 = sigma_from_snr(spec.covariance, config.snr_db);
  std::vector<MarkovSamplerParams> markov_params;
  if (config.sampling == SamplingModel::markov)
    for (double g : config.gamma_grid)
      markov_params.push_back(
          markov_params_from_targets(g, config.markov_l0, config.markov_calibration));
  std::vector<OptaPoint> curve;
  for (size_t gi = 0; gi < config.gamma_grid.size(); ++gi) {
    double sum = 0.0;
    for (int rep = 0; rep < config.repeats; ++rep) {
      const CellData cell = realize_cell(config, spec, markov_params, sigma2, gi, rep);
      sum += opta_nmse(spec.covariance, cell.mask.observed_count(), config.n_rows,
                       config.n_cols, config.snr_db, cell.truth.squared_norm(),
                       config.capacity_units);
    }
    curve.push_back({config.gamma_grid[gi], sum / config.repeats});
  }
  return curve;
}

std::vector<AggregateRow> aggregate_results(const std::vector<RunResult>& rows) {
  std::vector<AggregateRow> out;
  for (const auto& r : rows) {
    if (!out.empty()) {
      auto& last = out.back();
      if (last.gamma == r.gamma && last.method == r.method && smr_equal(last.smr, r.smr))
        continue;
    }
    AggregateRow agg;
    agg.gamma = r.gamma;
    agg.method = r.method;
    agg.smr = r.smr;
    agg.sampling = r.sampling;
    out.push_back(agg);
  }
  for (auto& agg : out) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows)
      if (r.gamma == agg.gamma && r.method == agg.method && smr_equal(r.smr, agg.smr)) {
        sum += r.nmse;
        ++n;
      }
    agg.count = n;
    agg.mean_nmse = sum / n;
    double ss = 0.0;
    for (const auto& r : rows)
      if (r.gamma == agg.gamma && r.method == agg.method && smr_equal(r.smr, agg.smr))
        ss += (r.nmse - agg.mean_nmse) * (r.nmse - agg.mean_nmse);
    agg.std_nmse = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  }
  return out;
}

std::string results_csv_text(const std::vector<RunResult>& rows) {
  std::ostringstream out;
  out << "gamma,method,smr,sampling,repeat,nmse,iterations,converged,seconds\n";
  for (const auto& r : rows) {
    out << fmt_double(r.gamma) << ',' << method_name(r.method) << ',' << r.smr.label()
        << ',' << r.sampling << ',' << r.repeat << ',' << fmt_double(r.nmse) << ','
        << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << fmt_double(r.seconds)
        << '\n';
  }
  return out.str();
}

void write_results_csv(const std::string& path, const std::vector<RunResult>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << results_csv_text(rows);
}

std::vector<RunResult> read_results_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty results file: " + path);
  if (trim(line) != "gamma,method,smr,sampling,repeat,nmse,iterations,converged,seconds")
    throw std::runtime_error("unexpected results header in " + path);
  std::vector<RunResult> rows;
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(trim(line));
    if (cells.size() != 9) throw std::runtime_error("bad results row in " + path);
    RunResult r;
    r.gamma = parse_double(cells[0]);
    r.method = method_from_name(cells[1]);
    r.smr = smr_from_label(cells[2]);
    r.sampling = cells[3];
    r.repeat = static_cast<int>(parse_int(cells[4]));
    r.nmse = parse_double(cells[5]);
    r.iterations = static_cast<int>(parse_int(cells[6]));
    r.converged = parse_int(cells[7]) != 0;
    r.seconds = parse_double(cells[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_aggregates_csv(const std::string& path,
                          const std::vector<AggregateRow>& aggregates) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "gamma,method,smr,sampling,mean_nmse,std_nmse,count\n";
  for (const auto& a : aggregates) {
    f << fmt_double(a.gamma) << ',' << method_name(a.method) << ',' << a.smr.label()
      << ',' << a.sampling << ',' << fmt_double(a.mean_nmse) << ','
      << fmt_double(a.std_nmse) << ',' << a.count << '\n';
  }
}

void emit_plot_data(const std::string& path, const std::vector<AggregateRow>& aggregates,
                    const std::vector<OptaPoint>& bound) {
  if (aggregates.empty())
    throw std::invalid_argument("emit_plot_data requires non-empty results");
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "gamma,series,mean_nmse,std_nmse\n";
  for (const auto& a : aggregates) {
    const std::string series = a.method == Method::svt
                                   ? std::string("svt")
                                   : method_name(a.method) + " smr=" + a.smr.label();
    f << fmt_double(a.gamma) << ',' << series << ',' << fmt_double(a.mean_nmse) << ','
      << fmt_double(a.std_nmse) << '\n';
  }
  for (const auto& p : bound)
    f << fmt_double(p.gamma) << ",opta," << fmt_double(p.bound) << ",0\n";
}

void write_opta_csv(const std::string& path, const std::vector<OptaPoint>& curve) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "gamma,opta_nmse\n";
  for (const auto& p : curve)
    f << fmt_double(p.gamma) << ',' << fmt_double(p.bound) << '\n';
}

}  // namespace mdr
