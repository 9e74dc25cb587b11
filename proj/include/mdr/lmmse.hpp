#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mdr/acquisition.hpp"
#include "mdr/gauss_source.hpp"

namespace mdr {

/// Second-order statistics supplied to the estimator (possibly mismatched).
struct LmmseModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double noise_variance = 0.0;

  int dimension() const { return static_cast<int>(mean.size()); }
  void validate() const;
};

/// Conditional mean of one column given noisy observations on a subset of rows:
/// mu + Sigma A^T (A Sigma A^T + sigma^2 I)^{-1} (y - A mu). Returns the full
/// length-N estimate; observed rows carry the filtered value.
Eigen::VectorXd lmmse_column(const std::vector<int>& observed_rows,
                             const Eigen::VectorXd& observed_values,
                             const LmmseModel& model);

/// Column-wise recovery of the whole matrix. Columns with identical masks
/// share one factorization.
StateMatrix lmmse_recover(const NoisyObservations& obs, const LmmseModel& model);

/// Average posterior variance over missing entries:
/// mean over Omega^c of diag(Sigma_cc - Sigma_co (Sigma_oo + sigma^2 I)^{-1} Sigma_oc).
/// Zero when Omega^c is empty.
double lmmse_posterior_distortion(const ObservationMask& mask, const LmmseModel& model);

}  // namespace mdr
