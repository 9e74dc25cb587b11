#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "mdr/csv.hpp"
#include "mdr/harness.hpp"
#include "test_util.hpp"

using namespace mdr;

namespace {

// small, fast sweep configuration used across the tests here
ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.n_rows = 12;
  cfg.n_cols = 10;
  cfg.mean_value = 240.0;
  cfg.variance = 4.0;
  cfg.rho = 0.9;
  cfg.snr_db = 20.0;
  cfg.gamma_grid = {0.2, 0.5, 0.8};
  cfg.methods = {Method::lmmse, Method::svt, Method::bsvt};
  cfg.smr_levels = {SmrLevel{}, SmrLevel{false, 10.0}};
  cfg.repeats = 2;
  cfg.base_seed = 7;
  cfg.svt.max_iterations = 40;
  cfg.bsvt_max_iterations = 40;
  cfg.bsvt_grid = 32;
  cfg.record_timing = false;
  return cfg;
}

}  // namespace

TEST_CASE("nmse basics") {
  StateMatrix truth;
  truth.values = Eigen::MatrixXd::Constant(3, 3, 2.0);
  StateMatrix same = truth;
  CHECK(nmse(truth, same) == 0.0);
  StateMatrix zero;
  zero.values = Eigen::MatrixXd::Zero(3, 3);
  CHECK(nmse(truth, zero) == doctest::Approx(1.0).epsilon(1e-12));
  StateMatrix twice;
  twice.values = 2.0 * truth.values;
  CHECK(nmse(truth, twice) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(nmse(zero, zero), std::invalid_argument);
}

TEST_CASE("config text parsing round-trips the documented keys") {
  const std::string text = R"(
# sweep description
n_rows = 16
n_cols = 14
mean_value = 100.0
variance = 2.0
rho = 0.5
snr_db = 15
gamma_grid = 0.1, 0.4, 0.7
methods = svt, bsvt
smr_levels = exact, 100, 10
sampling = markov
markov_l0 = 16
markov_calibration = geometric
repeats = 3
base_seed = 99
svt_tau = 80
svt_step = 1.1
svt_tol = 1e-3
svt_max_iter = 200
bsvt_step = 1.3
bsvt_tol = 1e-3
bsvt_max_iter = 250
bsvt_grid = 64
emit_opta = true
record_timing = false
out = /tmp/results.csv
)";
  const ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.n_rows == 16);
  CHECK(cfg.n_cols == 14);
  CHECK(cfg.gamma_grid == std::vector<double>{0.1, 0.4, 0.7});
  CHECK(cfg.methods == std::vector<Method>{Method::svt, Method::bsvt});
  REQUIRE(cfg.smr_levels.size() == 3);
  CHECK(cfg.smr_levels[0].exact);
  CHECK(cfg.smr_levels[2].value == 10.0);
  CHECK(cfg.sampling == SamplingModel::markov);
  CHECK(cfg.markov_calibration == MarkovCalibration::geometric);
  CHECK(cfg.svt.tau == 80.0);
  CHECK(cfg.emit_opta);
  CHECK_FALSE(cfg.record_timing);
  CHECK(cfg.out == "/tmp/results.csv");
}

TEST_CASE("unknown config keys are rejected") {
  CHECK_THROWS_WITH_AS(parse_config_text("n_rows = 4\nbogus_key = 1\n"),
                       "unknown config key: bogus_key", std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("gamma_grid = 0.5, 0.2\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("methods = svt, svt\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("methods = magic\n"), std::invalid_argument);
}

TEST_CASE("row counting contract") {
  ExperimentConfig cfg = tiny_config();
  cfg.gamma_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8};
  cfg.methods = {Method::svt, Method::bsvt};
  cfg.smr_levels = {SmrLevel{}};
  cfg.repeats = 20;
  cfg.svt.max_iterations = 3;  // row counting only; keep the runs short
  cfg.bsvt_max_iterations = 3;
  const SweepOutput out = run_sweep(cfg, 2);
  CHECK(out.rows.size() == 360);
  CHECK(out.aggregates.size() == 18);
}

TEST_CASE("mismatch levels multiply the statistics-based methods only") {
  ExperimentConfig cfg = tiny_config();
  cfg.smr_levels = {SmrLevel{}, SmrLevel{false, 100.0}, SmrLevel{false, 10.0}};
  cfg.svt.max_iterations = 3;
  cfg.bsvt_max_iterations = 3;
  const SweepOutput out = run_sweep(cfg, 1);
  // per cell: svt once, lmmse and bsvt once per level
  CHECK(out.rows.size() == cfg.gamma_grid.size() * cfg.repeats * (1 + 2 * 3));
  const auto tmp = std::filesystem::temp_directory_path() / "mdr_plot_test.csv";
  emit_plot_data(tmp.string(), out.aggregates, {});
  std::ifstream f(tmp);
  std::set<std::string> series;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    const auto cells = split_csv_line(line);
    REQUIRE(cells.size() == 4);
    series.insert(cells[1]);
  }
  CHECK(series.size() == 7);  // svt + lmmse x3 + bsvt x3
  std::filesystem::remove(tmp);
}

TEST_CASE("emit_plot_data rejects empty results") {
  CHECK_THROWS_AS(emit_plot_data("/tmp/never.csv", {}, {}), std::invalid_argument);
}

TEST_CASE("sweep output is canonical and deterministic across schedules") {
  const ExperimentConfig cfg = tiny_config();
  const SweepOutput a = run_sweep(cfg, 1);
  const SweepOutput b = run_sweep(cfg, 2);
  const SweepOutput c = run_sweep(cfg, 2);
  CHECK(results_csv_text(a.rows) == results_csv_text(b.rows));
  CHECK(results_csv_text(b.rows) == results_csv_text(c.rows));
}

TEST_CASE("methods within a cell consume identical observations") {
  const ExperimentConfig cfg = tiny_config();
  const SweepOutput out = run_sweep(cfg, 2);
  std::map<std::pair<double, int>, std::set<std::uint64_t>> checksums;
  for (const auto& r : out.rows)
    checksums[{r.gamma, r.repeat}].insert(r.cell_checksum);
  for (const auto& [cell, sums] : checksums) CHECK(sums.size() == 1);
  // distinct cells have distinct data
  std::set<std::uint64_t> all;
  for (const auto& [cell, sums] : checksums) all.insert(*sums.begin());
  CHECK(all.size() == checksums.size());
}

TEST_CASE("child seeds are collision-free over a large grid") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t gi = 0; gi < 100; ++gi)
    for (std::uint64_t rep = 0; rep < 100; ++rep)
      seeds.insert(derive_seed(1, {gi, rep}));
  CHECK(seeds.size() == 10000);
}

TEST_CASE("aggregates equal the mean and std of their rows") {
  const ExperimentConfig cfg = tiny_config();
  const SweepOutput out = run_sweep(cfg, 2);
  for (const auto& agg : out.aggregates) {
    std::vector<double> vals;
    for (const auto& r : out.rows)
      if (r.gamma == agg.gamma && r.method == agg.method &&
          r.smr.label() == agg.smr.label())
        vals.push_back(r.nmse);
    REQUIRE(static_cast<int>(vals.size()) == agg.count);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    CHECK(agg.mean_nmse == doctest::Approx(mean).epsilon(1e-12));
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double sd = vals.size() > 1 ? std::sqrt(ss / (vals.size() - 1)) : 0.0;
    CHECK(agg.std_nmse == doctest::Approx(sd).epsilon(1e-12));
  }
}

TEST_CASE("results CSV round-trip") {
  const ExperimentConfig cfg = tiny_config();
  const SweepOutput out = run_sweep(cfg, 2);
  const auto path = std::filesystem::temp_directory_path() / "mdr_results_test.csv";
  write_results_csv(path.string(), out.rows);
  const auto back = read_results_csv(path.string());
  REQUIRE(back.size() == out.rows.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].gamma == out.rows[i].gamma);
    CHECK(back[i].method == out.rows[i].method);
    CHECK(back[i].smr.label() == out.rows[i].smr.label());
    CHECK(back[i].sampling == out.rows[i].sampling);
    CHECK(back[i].repeat == out.rows[i].repeat);
    CHECK(back[i].nmse == out.rows[i].nmse);
    CHECK(back[i].iterations == out.rows[i].iterations);
    CHECK(back[i].converged == out.rows[i].converged);
    CHECK(back[i].seconds == out.rows[i].seconds);
  }
  std::filesystem::remove(path);
}

TEST_CASE("markov sweep runs end to end") {
  ExperimentConfig cfg = tiny_config();
  cfg.sampling = SamplingModel::markov;
  cfg.markov_l0 = 12.0;
  cfg.markov_calibration = MarkovCalibration::geometric;
  cfg.gamma_grid = {0.3, 0.6};
  cfg.emit_opta = true;
  const SweepOutput out = run_sweep(cfg, 2);
  CHECK(out.rows.size() == 2 * 2 * 5);
  REQUIRE(out.opta.size() == 2);
  for (const auto& p : out.opta) {
    CHECK(p.bound > 0.0);
    CHECK(std::isfinite(p.bound));
  }
  for (const auto& r : out.rows) CHECK(r.sampling == "markov");
}

TEST_CASE("failed estimator runs become failure rows, not aborts") {
  ExperimentConfig cfg;
  cfg.n_rows = 1;
  cfg.n_cols = 1;
  cfg.mean_value = 1.0;
  cfg.variance = 1.0;
  cfg.rho = 0.0;
  cfg.gamma_grid = {0.9};
  cfg.methods = {Method::svt};
  cfg.smr_levels = {SmrLevel{}};
  cfg.repeats = 40;  // some masks are empty, which svt rejects
  cfg.base_seed = 3;
  cfg.record_timing = false;
  const SweepOutput out = run_sweep(cfg, 1);
  CHECK(out.rows.size() == 40);
  int failed = 0;
  for (const auto& r : out.rows) {
    if (r.failed) {
      ++failed;
      CHECK(std::isnan(r.nmse));
      CHECK_FALSE(r.error.empty());
    }
  }
  CHECK(failed > 0);
  CHECK(failed < 40);
}

TEST_CASE("opta curve matches the sweep-embedded bound") {
  ExperimentConfig cfg = tiny_config();
  cfg.emit_opta = true;
  const SweepOutput out = run_sweep(cfg, 2);
  const auto curve = opta_curve(cfg);
  REQUIRE(curve.size() == out.opta.size());
  for (size_t i = 0; i < curve.size(); ++i) {
    CHECK(curve[i].gamma == out.opta[i].gamma);
    CHECK(curve[i].bound == doctest::Approx(out.opta[i].bound).epsilon(1e-12));
  }
}

TEST_CASE("stable hash distinguishes configs") {
  const ExperimentConfig a = tiny_config();
  ExperimentConfig b = a;
  b.snr_db = 25.0;
  CHECK(a.stable_hash() == tiny_config().stable_hash());
  CHECK(a.stable_hash() != b.stable_hash());
}
