#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mdr/gauss_source.hpp"
#include "mdr/rng.hpp"
#include "mdr/sampling.hpp"

namespace mdr {

/// Everything the operator sees: noisy values on Omega, stored sparse and
/// aligned with the mask's per-column row lists.
struct NoisyObservations {
  ObservationMask mask;
  std::vector<std::vector<double>> values;  // values[j][k] pairs with mask.observed[j][k]
  double noise_variance = 0.0;

  long long count() const { return mask.observed_count(); }
  double squared_norm() const;       // ||P_Omega(R)||_F^2
  double mean_squared_value() const; // averaged over Omega; 0 when Omega empty

  /// Observed values of column j as a dense vector aligned with mask.observed[j].
  Eigen::VectorXd column_values(int col) const;
};

/// snr = 10^(snr_db/10); sigma^2 = (tr(Sigma)/N) / snr.
double sigma_from_snr(const Eigen::MatrixXd& sigma_cov, double snr_db);

/// Adds N(0, sigma2) noise to each observed entry of m; unobserved entries are
/// never read. Draws happen in column-major mask order.
NoisyObservations acquire(const StateMatrix& m, const ObservationMask& mask,
                          double sigma2, RandomStream& rng);

/// CSV rows (row, col, value) after three header lines: n_rows, n_cols,
/// noise_variance.
void write_observations_csv(const std::string& path, const NoisyObservations& obs);
NoisyObservations read_observations_csv(const std::string& path);

}  // namespace mdr
