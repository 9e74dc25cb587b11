#include "mdr/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "mdr/csv.hpp"

namespace mdr {

long long ObservationMask::observed_count() const {
  long long c = 0;
  for (const auto& col : observed) c += static_cast<long long>(col.size());
  return c;
}

bool ObservationMask::is_observed(int row, int col) const {
  const auto& rows = observed[static_cast<size_t>(col)];
  return std::binary_search(rows.begin(), rows.end(), row);
}

std::vector<int> ObservationMask::missing_rows(int col) const {
  const auto& rows = observed[static_cast<size_t>(col)];
  std::vector<int> out;
  out.reserve(static_cast<size_t>(n_rows) - rows.size());
  size_t k = 0;
  for (int i = 0; i < n_rows; ++i) {
    if (k < rows.size() && rows[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

void ObservationMask::validate() const {
  if (n_rows < 1 || n_cols < 1)
    throw std::invalid_argument("mask dimensions must be positive");
  if (observed.size() != static_cast<size_t>(n_cols))
    throw std::invalid_argument("mask column count mismatch");
  for (const auto& rows : observed) {
    int prev = -1;
    for (int r : rows) {
      if (r < 0 || r >= n_rows) throw std::invalid_argument("mask row out of range");
      if (r <= prev) throw std::invalid_argument("mask rows must be strictly ascending");
      prev = r;
    }
  }
}

void MarkovSamplerParams::validate() const {
  if (!(p1 >= 0.0 && p1 <= 1.0))
    throw std::invalid_argument("p1 must be in [0, 1]");
  if (!(p2 > 0.0 && p2 <= 1.0))
    throw std::invalid_argument("p2 must be in (0, 1]");
}

ObservationMask uniform_mask(int n_rows, int n_cols, double gamma, RandomStream& rng) {
  if (n_rows < 1 || n_cols < 1)
    throw std::invalid_argument("mask dimensions must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("gamma must be in [0, 1]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ObservationMask mask;
  mask.n_rows = n_rows;
  mask.n_cols = n_cols;
  mask.observed.resize(static_cast<size_t>(n_cols));
  for (int j = 0; j < n_cols; ++j) {
    auto& rows = mask.observed[static_cast<size_t>(j)];
    for (int i = 0; i < n_rows; ++i) {
      if (unit(rng) >= gamma) rows.push_back(i);  // u in [0,1): gamma=0 keeps all
    }
  }
  return mask;
}

ObservationMask markov_mask(int n_rows, int n_cols, const MarkovSamplerParams& params,
                            RandomStream& rng) {
  if (n_rows < 1 || n_cols < 1)
    throw std::invalid_argument("mask dimensions must be positive");
  params.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ObservationMask mask;
  mask.n_rows = n_rows;
  mask.n_cols = n_cols;
  mask.observed.resize(static_cast<size_t>(n_cols));
  bool missing = unit(rng) < params.stationary_missing();
  for (int j = 0; j < n_cols; ++j) {
    auto& rows = mask.observed[static_cast<size_t>(j)];
    for (int i = 0; i < n_rows; ++i) {
      if (!missing) rows.push_back(i);
      const double p = missing ? params.p2 : params.p1;
      if (unit(rng) < p) missing = !missing;
    }
  }
  return mask;
}

MarkovSamplerParams markov_params_from_targets(double gamma, double l0,
                                               MarkovCalibration mode) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("gamma must be in (0, 1)");
  if (!(l0 >= 1.0)) throw std::invalid_argument("l0 must be at least 1");
  double p2 = 0.0;
  if (mode == MarkovCalibration::geometric) {
    p2 = 1.0 / l0;
  } else {
    // l0 p2^2 + (1-gamma) p2 - (1-gamma) = 0, positive root
    const double b = 1.0 - gamma;
    p2 = (-b + std::sqrt(b * b + 4.0 * l0 * b)) / (2.0 * l0);
  }
  if (!(p2 > 0.0 && p2 <= 1.0))
    throw std::runtime_error("no valid p2 in (0, 1] for the given targets");
  const double p1 = gamma * p2 / (1.0 - gamma);
  if (!(p1 >= 0.0 && p1 <= 1.0))
    throw std::runtime_error("no valid p1 in [0, 1] for the given targets");
  MarkovSamplerParams params{p1, p2};
  params.validate();
  return params;
}

MaskStats mask_stats(const ObservationMask& mask) {
  MaskStats stats;
  long long missing = 0;
  long long runs = 0;
  long long current = 0;
  for (int j = 0; j < mask.n_cols; ++j) {
    const auto& rows = mask.observed[static_cast<size_t>(j)];
    size_t k = 0;
    for (int i = 0; i < mask.n_rows; ++i) {
      const bool obs = k < rows.size() && rows[k] == i;
      if (obs) {
        ++k;
        if (current > 0) {
          ++runs;
          current = 0;
        }
      } else {
        ++missing;
        ++current;
      }
    }
  }
  if (current > 0) ++runs;
  stats.missing_ratio = static_cast<double>(missing) / static_cast<double>(mask.size());
  stats.mean_run_length =
      runs > 0 ? static_cast<double>(missing) / static_cast<double>(runs) : 0.0;
  return stats;
}

std::vector<std::vector<int>> group_columns_by_pattern(const ObservationMask& mask) {
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<int>> groups;
  for (int j = 0; j < mask.n_cols; ++j) {
    const auto& rows = mask.observed[static_cast<size_t>(j)];
    auto [it, inserted] = index.try_emplace(rows, static_cast<int>(groups.size()));
    if (inserted) groups.emplace_back();
    groups[static_cast<size_t>(it->second)].push_back(j);
  }
  return groups;
}

void write_mask_csv(const std::string& path, const ObservationMask& mask) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "n_rows," << mask.n_rows << '\n';
  f << "n_cols," << mask.n_cols << '\n';
  for (int j = 0; j < mask.n_cols; ++j)
    for (int i : mask.observed[static_cast<size_t>(j)]) f << i << ',' << j << '\n';
}

ObservationMask read_mask_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  ObservationMask mask;
  for (int h = 0; h < 2; ++h) {
    if (!std::getline(f, line)) throw std::runtime_error("truncated mask header in " + path);
    auto cells = split_csv_line(trim(line));
    if (cells.size() != 2) throw std::runtime_error("bad mask header in " + path);
    const std::string key = trim(cells[0]);
    const int value = static_cast<int>(parse_int(trim(cells[1])));
    if (key == "n_rows") {
      mask.n_rows = value;
    } else if (key == "n_cols") {
      mask.n_cols = value;
    } else {
      throw std::runtime_error("unknown mask header key: " + key);
    }
  }
  if (mask.n_rows < 1 || mask.n_cols < 1)
    throw std::runtime_error("bad mask dimensions in " + path);
  mask.observed.resize(static_cast<size_t>(mask.n_cols));
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(trim(line));
    if (cells.size() != 2) throw std::runtime_error("bad mask row in " + path);
    const int i = static_cast<int>(parse_int(trim(cells[0])));
    const int j = static_cast<int>(parse_int(trim(cells[1])));
    if (i < 0 || i >= mask.n_rows || j < 0 || j >= mask.n_cols)
      throw std::runtime_error("mask index out of range in " + path);
    mask.observed[static_cast<size_t>(j)].push_back(i);
  }
  for (auto& rows : mask.observed) std::sort(rows.begin(), rows.end());
  mask.validate();
  return mask;
}

}  // namespace mdr
