#pragma once

#include <Eigen/Dense>

namespace mdr {

/// One point on the reverse water-filling curve of a Gaussian source.
struct RateDistortionPoint {
  double theta = 0.0;
  double rate = 0.0;        // nats per source symbol
  double distortion = 0.0;  // per-entry MSE
};

enum class CapacityUnits { nats, log10 };

/// R = (1/N) sum max(0, ln(lambda_i/theta)/2), D = (1/N) sum min(theta, lambda_i).
/// Zero eigenvalues contribute nothing to either sum.
RateDistortionPoint rd_point(const Eigen::VectorXd& eigenvalues, double theta);

/// Inverts the rate curve by bisection on the water level; target_rate = 0
/// returns the mean eigenvalue.
double distortion_at_rate(const Eigen::VectorXd& eigenvalues, double target_rate);

/// Distortion floor for the experiment: the rate budget per source symbol is
/// |Omega|/(2 N L) * log(1 + snr), matched against the source's
/// rate-distortion curve; the result is normalized by the realized energy.
double opta_nmse(const Eigen::MatrixXd& sigma_cov, long long n_observed, int n_rows,
                 int n_cols, double snr_db, double ground_truth_energy,
                 CapacityUnits units = CapacityUnits::nats);

}  // namespace mdr
