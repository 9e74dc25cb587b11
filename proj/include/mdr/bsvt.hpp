#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mdr/acquisition.hpp"
#include "mdr/gauss_source.hpp"
#include "mdr/lmmse.hpp"

namespace mdr {

struct BsvtConfig {
  double step_size = 1.2;       // delta_b in (0, 2)
  double tolerance = 1e-4;      // epsilon
  int max_iterations = 500;
  int threshold_grid_size = 512;
  LmmseModel lmmse_model;       // postulated mu, Sigma, sigma^2

  // Study switches, both off by default: add sigma^2 I to the fill solve;
  // condition the fill on the observed values instead of P_Omega(Y^k).
  bool regularized_fill = false;
  bool condition_on_observations = false;

  void validate() const;
};

/// Unbiased risk estimate of spectral soft-thresholding at threshold tau under
/// i.i.d. Gaussian noise of variance noise_variance. singular_values must be
/// sorted descending with min(N, L) entries. The divergence term is zero when
/// any two singular values coincide within relative tolerance 1e-9.
double sure_risk(const Eigen::VectorXd& singular_values, double tau,
                 double noise_variance, int n_rows, int n_cols);

/// Minimizes the risk estimate over {0}, the singular values of z, and a
/// uniform grid on [0, sigma_max]; ties break toward the smallest threshold.
double optimal_threshold(const Eigen::MatrixXd& z, double noise_variance,
                         int grid_size);
double optimal_threshold_from_singular_values(const Eigen::VectorXd& singular_values,
                                              double noise_variance, int grid_size,
                                              int n_rows, int n_cols);

/// sigma^2_{Z^k} = (||Y^k - P_Omega(R)||_F^2 + |Omega^c| D_LMMSE) / (N L),
/// floored at 1e-12 times the mean squared observed value.
double noise_level(const Eigen::MatrixXd& y_k, const NoisyObservations& obs,
                   double d_lmmse);

struct BsvtIteration {
  int k = 0;
  double tau = 0.0;       // threshold applied when forming X^k
  double sigma2_z = 0.0;  // noise level that selected that threshold
  double residual = 0.0;  // Omega-restricted relative residual of X^k
};

struct BsvtResult {
  StateMatrix estimate;
  int iterations = 0;
  bool converged = false;
  std::vector<BsvtIteration> trace;
};

/// Bayesian SVT: the SVT iteration with missing entries filled per iteration
/// by an LMMSE estimate conditioned on P_Omega(Y^k) and the threshold chosen
/// by minimizing the unbiased risk estimate on the filled matrix.
BsvtResult bsvt_recover(const NoisyObservations& obs, const BsvtConfig& config);

}  // namespace mdr
