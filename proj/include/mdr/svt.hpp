#pragma once

#include <Eigen/Dense>
#include <optional>

#include "mdr/acquisition.hpp"
#include "mdr/gauss_source.hpp"

namespace mdr {

struct SvtConfig {
  std::optional<double> tau;   // defaults to 5 * n_rows when unset
  double step_size = 1.2;      // delta_s in (0, 2)
  double tolerance = 1e-4;     // epsilon
  int max_iterations = 500;

  void validate() const;
};

/// Spectral soft-thresholding: U diag((sigma_i - tau)_+) V^T.
Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& y, double tau);

struct SvtResult {
  StateMatrix estimate;
  int iterations = 0;
  bool converged = false;
};

/// Two-step SVT iteration from Y^0 = 0 with the observed values standing in
/// for P_Omega(M), stopping when the Omega-restricted relative residual drops
/// below the tolerance. Hitting max_iterations is not an error.
SvtResult svt_recover(const NoisyObservations& obs, const SvtConfig& config = {});

}  // namespace mdr
