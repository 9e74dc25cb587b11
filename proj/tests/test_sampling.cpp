#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mdr/sampling.hpp"
#include "test_util.hpp"

using namespace mdr;

TEST_CASE("uniform mask extremes") {
  auto rng = make_stream(1);
  const ObservationMask full = uniform_mask(7, 9, 0.0, rng);
  CHECK(full.observed_count() == 63);
  const ObservationMask empty = uniform_mask(7, 9, 1.0, rng);
  CHECK(empty.observed_count() == 0);
}

TEST_CASE("uniform mask hits the target ratio on average") {
  auto rng = make_stream(11);
  const int trials = 10000;
  double sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ObservationMask m = uniform_mask(500, 500, 0.5, rng);
    sum += static_cast<double>(m.observed_count()) / static_cast<double>(m.size());
  }
  const double mean = sum / trials;
  CHECK(std::abs(mean - 0.5) <= 0.005 * 0.5);
}

TEST_CASE("row observed counts are binomial-consistent") {
  auto rng = make_stream(12);
  const int n_rows = 50, n_cols = 100, masks = 200;  // 10^4 row samples
  const double p = 0.7;                              // observe probability
  std::vector<double> counts;
  counts.reserve(static_cast<size_t>(n_rows) * masks);
  for (int t = 0; t < masks; ++t) {
    const ObservationMask m = uniform_mask(n_rows, n_cols, 1.0 - p, rng);
    std::vector<int> per_row(n_rows, 0);
    for (int j = 0; j < n_cols; ++j)
      for (int i : m.observed[static_cast<size_t>(j)]) ++per_row[static_cast<size_t>(i)];
    for (int c : per_row) counts.push_back(static_cast<double>(c));
  }
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= static_cast<double>(counts.size());
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= static_cast<double>(counts.size() - 1);
  const double expected = n_cols * p * (1.0 - p);
  CHECK(std::abs(var - expected) <= 0.10 * expected);
}

TEST_CASE("markov chain with p1=0 never leaves the observed state") {
  auto rng = make_stream(3);
  const ObservationMask m = markov_mask(40, 40, MarkovSamplerParams{0.0, 0.3}, rng);
  CHECK(m.observed_count() == m.size());
}

TEST_CASE("markov with p1+p2=1 is indistinguishable from uniform") {
  // Transition probabilities summing to one make emissions independent, so
  // missing-run lengths are geometric(1/2). Chi-square over 10^6 entries.
  auto rng = make_stream(17);
  const ObservationMask m = markov_mask(10000, 100, MarkovSamplerParams{0.5, 0.5}, rng);
  std::vector<long long> hist(11, 0);  // run lengths 1..10 and a tail bin
  long long runs = 0;
  long long current = 0;
  for (int j = 0; j < m.n_cols; ++j) {
    const auto& rows = m.observed[static_cast<size_t>(j)];
    size_t k = 0;
    for (int i = 0; i < m.n_rows; ++i) {
      const bool obs = k < rows.size() && rows[k] == i;
      if (obs) {
        ++k;
        if (current > 0) {
          ++runs;
          ++hist[static_cast<size_t>(std::min<long long>(current, 11) - 1)];
          current = 0;
        }
      } else {
        ++current;
      }
    }
  }
  if (current > 0) {
    ++runs;
    ++hist[static_cast<size_t>(std::min<long long>(current, 11) - 1)];
  }
  double chi2 = 0.0;
  for (int b = 0; b < 11; ++b) {
    const double prob = b < 10 ? std::pow(0.5, b + 1) : std::pow(0.5, 10);
    const double expected = prob * static_cast<double>(runs);
    const double d = static_cast<double>(hist[static_cast<size_t>(b)]) - expected;
    chi2 += d * d / expected;
  }
  // 10 degrees of freedom; critical value at p = 0.01
  CHECK(chi2 <= 23.209);
}

TEST_CASE("markov calibration closed forms") {
  const auto paper = markov_params_from_targets(0.5, 1.0, MarkovCalibration::paper);
  CHECK(paper.p1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(paper.p2 == doctest::Approx(0.5).epsilon(1e-12));
  const auto geo = markov_params_from_targets(0.5, 4.0, MarkovCalibration::geometric);
  CHECK(geo.p2 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(geo.p1 == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("markov calibration reports unreachable targets") {
  CHECK_THROWS(markov_params_from_targets(0.9, 1.0, MarkovCalibration::paper));
}

TEST_CASE("long-run chain statistics match the stationary law") {
  // 10^7 entries; stationarity (Eq. for E[gamma]) holds for both calibrations
  // and the empirical mean run length matches the geometric sojourn 1/p2.
  for (auto mode : {MarkovCalibration::geometric, MarkovCalibration::paper}) {
    const auto params = markov_params_from_targets(0.7, 25.0, mode);
    auto rng = make_stream(mode == MarkovCalibration::geometric ? 101 : 202);
    const ObservationMask m = markov_mask(100000, 100, params, rng);
    const MaskStats stats = mask_stats(m);
    CHECK(std::abs(stats.missing_ratio - params.stationary_missing()) <=
          0.01 * params.stationary_missing());
    CHECK(std::abs(stats.mean_run_length - 1.0 / params.p2) <= 0.02 / params.p2);
  }
}

TEST_CASE("geometric calibration round-trips the targets") {
  const double gamma = 0.7, l0 = 25.0;
  const auto params = markov_params_from_targets(gamma, l0, MarkovCalibration::geometric);
  auto rng = make_stream(55);
  const ObservationMask m = markov_mask(100000, 100, params, rng);
  const MaskStats stats = mask_stats(m);
  CHECK(std::abs(stats.missing_ratio - gamma) <= 0.01 * gamma);
  CHECK(std::abs(stats.mean_run_length - l0) <= 0.02 * l0);
}

TEST_CASE("whole-column bursts appear when the target run spans a column") {
  auto rng = make_stream(77);
  const auto params = markov_params_from_targets(0.8, 100.0, MarkovCalibration::geometric);
  const ObservationMask m = markov_mask(100, 100, params, rng);
  const MaskStats stats = mask_stats(m);
  CHECK(stats.mean_run_length >= 20.0);  // uniform sampling at 0.8 would give 5
  int full_columns = 0;
  for (int j = 0; j < m.n_cols; ++j)
    if (m.observed[static_cast<size_t>(j)].empty()) ++full_columns;
  CHECK(full_columns >= 1);
}

TEST_CASE("mask stats on degenerate masks") {
  const auto full = test_util::full_mask(5, 4);
  CHECK(mask_stats(full).missing_ratio == 0.0);
  CHECK(mask_stats(full).mean_run_length == 0.0);

  ObservationMask three_by_one;
  three_by_one.n_rows = 3;
  three_by_one.n_cols = 1;
  three_by_one.observed = {{0}};
  const MaskStats s = mask_stats(three_by_one);
  CHECK(s.missing_ratio == doctest::Approx(2.0 / 3.0));
  CHECK(s.mean_run_length == doctest::Approx(2.0));

  const auto empty = test_util::empty_mask(4, 4);
  const MaskStats e = mask_stats(empty);
  CHECK(e.missing_ratio == 1.0);
  CHECK(e.mean_run_length == doctest::Approx(16.0));  // one run across columns
}

TEST_CASE("mask generation is deterministic per seed") {
  auto r1 = make_stream(31);
  auto r2 = make_stream(31);
  const ObservationMask a = uniform_mask(50, 50, 0.4, r1);
  const ObservationMask b = uniform_mask(50, 50, 0.4, r2);
  CHECK(a.observed == b.observed);
}

TEST_CASE("column grouping identifies shared patterns") {
  ObservationMask m;
  m.n_rows = 4;
  m.n_cols = 5;
  m.observed = {{0, 2}, {1}, {0, 2}, {}, {1}};
  const auto groups = group_columns_by_pattern(m);
  REQUIRE(groups.size() == 3);
  CHECK(groups[0] == std::vector<int>{0, 2});
  CHECK(groups[1] == std::vector<int>{1, 4});
  CHECK(groups[2] == std::vector<int>{3});
}

TEST_CASE("mask CSV round-trip") {
  auto rng = make_stream(63);
  const ObservationMask m = uniform_mask(20, 15, 0.35, rng);
  const auto path = std::filesystem::temp_directory_path() / "mdr_mask_test.csv";
  write_mask_csv(path.string(), m);
  const ObservationMask back = read_mask_csv(path.string());
  CHECK(back.n_rows == m.n_rows);
  CHECK(back.n_cols == m.n_cols);
  CHECK(back.observed == m.observed);
  std::filesystem::remove(path);
}

TEST_CASE("parameter validation") {
  const MarkovSamplerParams trapped{0.5, 0.0};
  CHECK_THROWS_AS(trapped.validate(), std::invalid_argument);
  const MarkovSamplerParams negative{-0.1, 0.5};
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
  auto rng = make_stream(1);
  CHECK_THROWS_AS(uniform_mask(5, 5, 1.5, rng), std::invalid_argument);
}
