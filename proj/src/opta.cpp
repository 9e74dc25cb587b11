#include "mdr/opta.hpp"

#include <cmath>
#include <stdexcept>

namespace mdr {

RateDistortionPoint rd_point(const Eigen::VectorXd& eigenvalues, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  const auto n = eigenvalues.size();
  if (n < 1) throw std::invalid_argument("eigenvalues must be non-empty");
  double rate = 0.0;
  double distortion = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = eigenvalues(i);
    if (lambda < 0.0) throw std::invalid_argument("eigenvalues must be nonnegative");
    if (lambda <= 0.0) continue;
    if (lambda > theta) rate += 0.5 * std::log(lambda / theta);
    distortion += std::min(theta, lambda);
  }
  const double dn = static_cast<double>(n);
  return {theta, rate / dn, distortion / dn};
}

double distortion_at_rate(const Eigen::VectorXd& eigenvalues, double target_rate) {
  if (target_rate < 0.0) throw std::invalid_argument("target rate must be nonnegative");
  const double lambda_max = eigenvalues.maxCoeff();
  if (lambda_max <= 0.0) return 0.0;  // degenerate source: zero distortion at any rate
  const double mean_lambda = eigenvalues.sum() / static_cast<double>(eigenvalues.size());
  if (target_rate == 0.0) return mean_lambda;

  // R(theta) is continuous and strictly decreasing where positive, with
  // R(lambda_max) = 0, so the root lies in (0, lambda_max].
  double lo = lambda_max;
  while (rd_point(eigenvalues, lo).rate < target_rate) {
    lo *= 0.5;
    if (lo < 1e-300) return 0.0;  // rate budget beyond representable water level
  }
  double hi = lambda_max;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto p = rd_point(eigenvalues, mid);
    if (std::abs(p.rate - target_rate) <= 1e-10 * target_rate)
      return p.distortion;
    if (p.rate > target_rate) lo = mid; else hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return rd_point(eigenvalues, 0.5 * (lo + hi)).distortion;
}

double opta_nmse(const Eigen::MatrixXd& sigma_cov, long long n_observed, int n_rows,
                 int n_cols, double snr_db, double ground_truth_energy,
                 CapacityUnits units) {
  if (n_rows < 1 || n_cols < 1) throw std::invalid_argument("dimensions must be positive");
  if (n_observed < 0) throw std::invalid_argument("n_observed must be nonnegative");
  if (!(ground_truth_energy > 0.0))
    throw std::invalid_argument("ground truth energy must be positive");
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double nl = static_cast<double>(n_rows) * static_cast<double>(n_cols);
  const double log_term =
      units == CapacityUnits::nats ? std::log1p(snr) : std::log10(1.0 + snr);
  const double budget = static_cast<double>(n_observed) / (2.0 * nl) * log_term;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_cov, Eigen::EigenvaluesOnly);
  Eigen::VectorXd eig = es.eigenvalues().cwiseMax(0.0);
  const double distortion = distortion_at_rate(eig, budget);
  return distortion * nl / ground_truth_energy;
}

}  // namespace mdr
