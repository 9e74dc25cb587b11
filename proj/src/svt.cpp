#include "mdr/svt.hpp"

#include <cmath>
#include <stdexcept>

namespace mdr {

void SvtConfig::validate() const {
  if (tau && *tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  if (!(step_size > 0.0 && step_size < 2.0))
    throw std::invalid_argument("step size must be in (0, 2)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
}

Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& y, double tau) {
  if (!y.allFinite()) throw std::invalid_argument("soft_threshold input must be finite");
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > tau) ++r;
  if (r == 0) return Eigen::MatrixXd::Zero(y.rows(), y.cols());
  const Eigen::VectorXd shrunk = sv.head(r).array() - tau;
  return svd.matrixU().leftCols(r) * shrunk.asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

namespace {

double omega_residual_norm(const Eigen::MatrixXd& x, const NoisyObservations& obs) {
  double s = 0.0;
  for (int j = 0; j < obs.mask.n_cols; ++j) {
    const auto& rows = obs.mask.observed[static_cast<size_t>(j)];
    const auto& vals = obs.values[static_cast<size_t>(j)];
    for (size_t k = 0; k < rows.size(); ++k) {
      const double d = x(rows[k], j) - vals[k];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

}  // namespace

SvtResult svt_recover(const NoisyObservations& obs, const SvtConfig& config) {
  config.validate();
  if (obs.count() == 0) throw std::invalid_argument("svt_recover needs at least one observation");
  const int n = obs.mask.n_rows;
  const int l = obs.mask.n_cols;
  const double tau = config.tau ? *config.tau : 5.0 * static_cast<double>(n);
  const double obs_norm = std::sqrt(obs.squared_norm());

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, l);  // supported on Omega
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, l);
  SvtResult result;
  for (int k = 1; k <= config.max_iterations; ++k) {
    x = k == 1 ? Eigen::MatrixXd::Zero(n, l) : soft_threshold(y, tau);
    result.iterations = k;
    const double num = omega_residual_norm(x, obs);
    const double residual = obs_norm > 0.0 ? num / obs_norm : (num > 0.0 ? 1.0 : 0.0);
    if (residual <= config.tolerance) {
      result.converged = true;
      break;
    }
    if (k == config.max_iterations) break;
    for (int j = 0; j < l; ++j) {
      const auto& rows = obs.mask.observed[static_cast<size_t>(j)];
      const auto& vals = obs.values[static_cast<size_t>(j)];
      for (size_t t = 0; t < rows.size(); ++t)
        y(rows[t], j) += config.step_size * (vals[t] - x(rows[t], j));
    }
  }
  result.estimate.values = std::move(x);
  return result;
}

}  // namespace mdr
