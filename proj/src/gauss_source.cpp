#include "mdr/gauss_source.hpp"

#include <cmath>
#include <stdexcept>

namespace mdr {

void GaussianSourceSpec::validate() const {
  const auto n = covariance.rows();
  if (n != covariance.cols())
    throw std::invalid_argument("covariance must be square");
  if (mean.size() != n)
    throw std::invalid_argument("mean length must equal covariance dimension");
  if (n < 1) throw std::invalid_argument("dimension must be at least 1");
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (covariance(i, j) != covariance(j, i))
        throw std::invalid_argument("covariance must be symmetric as stored");
  if (!covariance.allFinite())
    throw std::invalid_argument("covariance must be finite");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance,
                                                    Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -1e-10 * std::max(hi, 0.0))
    throw std::invalid_argument("covariance is not positive semidefinite");
}

Eigen::MatrixXd synthetic_covariance(int n, double variance, double rho) {
  if (n < 1) throw std::domain_error("n must be at least 1");
  if (variance <= 0.0) throw std::domain_error("variance must be positive");
  if (rho < 0.0 || rho >= 1.0) throw std::domain_error("rho must be in [0, 1)");
  Eigen::MatrixXd sigma(n, n);
  std::vector<double> pow_rho(static_cast<size_t>(n));
  pow_rho[0] = 1.0;
  for (int k = 1; k < n; ++k) pow_rho[static_cast<size_t>(k)] = pow_rho[static_cast<size_t>(k) - 1] * rho;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      sigma(i, j) = variance * pow_rho[static_cast<size_t>(std::abs(i - j))];
  return sigma;
}

namespace {

// F from the pivoted factorization P^T L D L^T P: F = P^T L sqrt(D).
// Small negative pivots (roundoff on semidefinite inputs) are clamped to zero.
bool try_factor(const Eigen::MatrixXd& sigma, Eigen::MatrixXd& out) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success) return false;
  Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const double tol = 1e-9 * std::max(dmax, 1e-300);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < -tol) return false;
    d(i) = d(i) > 0.0 ? std::sqrt(d(i)) : 0.0;
  }
  Eigen::MatrixXd L = ldlt.matrixL();
  out = ldlt.transpositionsP().transpose() * Eigen::MatrixXd(L * d.asDiagonal());
  return true;
}

}  // namespace

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& sigma) {
  Eigen::MatrixXd f;
  if (try_factor(sigma, f)) return f;
  const double n = static_cast<double>(sigma.rows());
  const double jitter = 1e-12 * sigma.trace() / n;
  Eigen::MatrixXd jittered = sigma;
  jittered.diagonal().array() += jitter;
  if (try_factor(jittered, f)) return f;
  throw std::runtime_error("covariance factorization failed: matrix is indefinite");
}

StateMatrix sample_source(const GaussianSourceSpec& spec, int l, RandomStream& rng) {
  if (l < 1) throw std::invalid_argument("l must be at least 1");
  const int n = spec.dimension();
  if (spec.covariance.rows() != n || spec.covariance.cols() != n)
    throw std::invalid_argument("spec dimensions inconsistent");
  const Eigen::MatrixXd f = covariance_factor(spec.covariance);
  std::normal_distribution<double> normal(0.0, 1.0);
  StateMatrix m;
  m.values.resize(n, l);
  Eigen::VectorXd z(n);
  for (int j = 0; j < l; ++j) {
    for (int i = 0; i < n; ++i) z(i) = normal(rng);
    m.values.col(j) = spec.mean + f * z;
  }
  return m;
}

Eigen::MatrixXd mismatch_covariance(const Eigen::MatrixXd& sigma, double smr,
                                    RandomStream& rng, MismatchMode mode) {
  if (smr <= 0.0) throw std::domain_error("smr must be positive");
  const auto n = sigma.rows();
  if (n != sigma.cols()) throw std::invalid_argument("sigma must be square");
  const double sigma_norm = sigma.norm();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) h(i, j) = normal(rng);
    Eigen::MatrixXd delta = h * h.transpose();
    delta = 0.5 * (delta + delta.transpose()).eval();  // exact symmetry
    const double delta_norm = delta.norm();
    if (delta_norm == 0.0) continue;
    const double scale = mode == MismatchMode::normalized
                             ? sigma_norm / (smr * delta_norm)
                             : (sigma_norm * sigma_norm) / (smr * delta_norm * delta_norm);
    return sigma + scale * delta;
  }
  throw std::runtime_error("mismatch draw degenerate twice (||Delta||_F = 0)");
}

}  // namespace mdr
