#pragma once

#include <Eigen/Dense>

#include "mdr/rng.hpp"

namespace mdr {

/// Per-column law of the state variables: columns of the state matrix are
/// i.i.d. draws from N(mean, covariance).
struct GaussianSourceSpec {
  Eigen::VectorXd mean;        // length N
  Eigen::MatrixXd covariance;  // N x N, symmetric PSD

  int dimension() const { return static_cast<int>(mean.size()); }

  /// Throws std::invalid_argument on dimension mismatch, asymmetry, or an
  /// eigenvalue below -1e-10 times the largest.
  void validate() const;
};

/// Ground-truth matrix: rows are time instants, columns are feeders.
struct StateMatrix {
  Eigen::MatrixXd values;

  int n_rows() const { return static_cast<int>(values.rows()); }
  int n_cols() const { return static_cast<int>(values.cols()); }
  double squared_norm() const { return values.squaredNorm(); }
};

enum class MismatchMode {
  normalized,     // scale so that ||Sigma* - Sigma||_F / ||Sigma||_F = 1/SMR
  paper_literal,  // scale factor (1/SMR) * ||Sigma||_F^2 / ||Delta||_F^2
};

/// Exponentially decaying correlation: Sigma_ij = variance * rho^|i-j|.
/// Positive definite for rho in [0, 1).
Eigen::MatrixXd synthetic_covariance(int n, double variance, double rho);

/// Symmetric factor F with F * F^T = sigma, via pivoted Cholesky (LDLT) with
/// a diagonal jitter of 1e-12 * tr(sigma)/n added once on failure.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& sigma);

/// Draws l independent columns from N(mean, covariance).
StateMatrix sample_source(const GaussianSourceSpec& spec, int l, RandomStream& rng);

/// Postulated covariance: Sigma + scale(SMR) * Delta with Delta = H H^T and
/// H standard normal. Symmetric PSD by construction.
Eigen::MatrixXd mismatch_covariance(const Eigen::MatrixXd& sigma, double smr,
                                    RandomStream& rng,
                                    MismatchMode mode = MismatchMode::normalized);

}  // namespace mdr
