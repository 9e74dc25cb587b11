#include "mdr/acquisition.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "mdr/csv.hpp"

namespace mdr {

double NoisyObservations::squared_norm() const {
  double s = 0.0;
  for (const auto& col : values)
    for (double v : col) s += v * v;
  return s;
}

double NoisyObservations::mean_squared_value() const {
  const long long n = count();
  return n > 0 ? squared_norm() / static_cast<double>(n) : 0.0;
}

Eigen::VectorXd NoisyObservations::column_values(int col) const {
  const auto& v = values[static_cast<size_t>(col)];
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(k)) = v[k];
  return out;
}

double sigma_from_snr(const Eigen::MatrixXd& sigma_cov, double snr_db) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double signal_power = sigma_cov.trace() / static_cast<double>(sigma_cov.rows());
  return signal_power / snr;
}

NoisyObservations acquire(const StateMatrix& m, const ObservationMask& mask,
                          double sigma2, RandomStream& rng) {
  if (mask.n_rows != m.n_rows() || mask.n_cols != m.n_cols())
    throw std::invalid_argument("mask dimensions do not match the state matrix");
  if (sigma2 < 0.0) throw std::invalid_argument("noise variance must be nonnegative");
  const double sigma = std::sqrt(sigma2);
  std::normal_distribution<double> normal(0.0, 1.0);
  NoisyObservations obs;
  obs.mask = mask;
  obs.noise_variance = sigma2;
  obs.values.resize(static_cast<size_t>(mask.n_cols));
  for (int j = 0; j < mask.n_cols; ++j) {
    const auto& rows = mask.observed[static_cast<size_t>(j)];
    auto& vals = obs.values[static_cast<size_t>(j)];
    vals.reserve(rows.size());
    for (int i : rows) vals.push_back(m.values(i, j) + sigma * normal(rng));
  }
  return obs;
}

void write_observations_csv(const std::string& path, const NoisyObservations& obs) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "n_rows," << obs.mask.n_rows << '\n';
  f << "n_cols," << obs.mask.n_cols << '\n';
  f << "noise_variance," << fmt_double(obs.noise_variance) << '\n';
  for (int j = 0; j < obs.mask.n_cols; ++j) {
    const auto& rows = obs.mask.observed[static_cast<size_t>(j)];
    const auto& vals = obs.values[static_cast<size_t>(j)];
    for (size_t k = 0; k < rows.size(); ++k)
      f << rows[k] << ',' << j << ',' << fmt_double(vals[k]) << '\n';
  }
}

NoisyObservations read_observations_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  NoisyObservations obs;
  int n_rows = 0, n_cols = 0;
  for (int h = 0; h < 3; ++h) {
    if (!std::getline(f, line))
      throw std::runtime_error("truncated observations header in " + path);
    auto cells = split_csv_line(trim(line));
    if (cells.size() != 2) throw std::runtime_error("bad observations header in " + path);
    const std::string key = trim(cells[0]);
    if (key == "n_rows") {
      n_rows = static_cast<int>(parse_int(trim(cells[1])));
    } else if (key == "n_cols") {
      n_cols = static_cast<int>(parse_int(trim(cells[1])));
    } else if (key == "noise_variance") {
      obs.noise_variance = parse_double(trim(cells[1]));
    } else {
      throw std::runtime_error("unknown observations header key: " + key);
    }
  }
  if (n_rows < 1 || n_cols < 1)
    throw std::runtime_error("bad observation dimensions in " + path);
  obs.mask.n_rows = n_rows;
  obs.mask.n_cols = n_cols;
  obs.mask.observed.resize(static_cast<size_t>(n_cols));
  obs.values.resize(static_cast<size_t>(n_cols));
  std::vector<std::vector<std::pair<int, double>>> cols(static_cast<size_t>(n_cols));
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(trim(line));
    if (cells.size() != 3) throw std::runtime_error("bad observation row in " + path);
    const int i = static_cast<int>(parse_int(trim(cells[0])));
    const int j = static_cast<int>(parse_int(trim(cells[1])));
    if (i < 0 || i >= n_rows || j < 0 || j >= n_cols)
      throw std::runtime_error("observation index out of range in " + path);
    cols[static_cast<size_t>(j)].emplace_back(i, parse_double(trim(cells[2])));
  }
  for (int j = 0; j < n_cols; ++j) {
    auto& col = cols[static_cast<size_t>(j)];
    std::sort(col.begin(), col.end());
    auto& rows = obs.mask.observed[static_cast<size_t>(j)];
    auto& vals = obs.values[static_cast<size_t>(j)];
    for (auto& [i, v] : col) {
      rows.push_back(i);
      vals.push_back(v);
    }
  }
  obs.mask.validate();
  return obs;
}

}  // namespace mdr
