#include "mdr/lmmse.hpp"

#include <stdexcept>

namespace mdr {

void LmmseModel::validate() const {
  if (covariance.rows() != covariance.cols())
    throw std::invalid_argument("model covariance must be square");
  if (mean.size() != covariance.rows())
    throw std::invalid_argument("model mean length must equal covariance dimension");
  if (noise_variance < 0.0)
    throw std::invalid_argument("noise variance must be nonnegative");
}

namespace {

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j)
    for (size_t i = 0; i < rows.size(); ++i)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(rows[i], cols[j]);
  return out;
}

// LLT of Sigma_oo + sigma^2 I with one jittered retry; singular systems are
// only reachable at sigma^2 = 0.
Eigen::LLT<Eigen::MatrixXd> observation_gram(const Eigen::MatrixXd& sigma,
                                             const std::vector<int>& rows,
                                             double noise_variance) {
  Eigen::MatrixXd s = submatrix(sigma, rows, rows);
  s.diagonal().array() += noise_variance;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-10 * sigma.trace() / static_cast<double>(sigma.rows());
  s.diagonal().array() += jitter;
  llt.compute(s);
  if (llt.info() == Eigen::Success) return llt;
  throw std::runtime_error("LMMSE observation system is singular");
}

}  // namespace

Eigen::VectorXd lmmse_column(const std::vector<int>& observed_rows,
                             const Eigen::VectorXd& observed_values,
                             const LmmseModel& model) {
  model.validate();
  const int n = model.dimension();
  if (observed_values.size() != static_cast<Eigen::Index>(observed_rows.size()))
    throw std::invalid_argument("observed rows and values must align");
  for (size_t k = 0; k < observed_rows.size(); ++k) {
    if (observed_rows[k] < 0 || observed_rows[k] >= n)
      throw std::invalid_argument("observed row out of range");
    if (k > 0 && observed_rows[k] <= observed_rows[k - 1])
      throw std::invalid_argument("observed rows must be distinct ascending");
  }
  if (observed_rows.empty()) return model.mean;

  const auto llt = observation_gram(model.covariance, observed_rows, model.noise_variance);
  Eigen::VectorXd centered(observed_values.size());
  for (size_t k = 0; k < observed_rows.size(); ++k)
    centered(static_cast<Eigen::Index>(k)) =
        observed_values(static_cast<Eigen::Index>(k)) - model.mean(observed_rows[k]);
  const Eigen::VectorXd w = llt.solve(centered);
  Eigen::MatrixXd cross(n, static_cast<Eigen::Index>(observed_rows.size()));
  for (size_t k = 0; k < observed_rows.size(); ++k)
    cross.col(static_cast<Eigen::Index>(k)) = model.covariance.col(observed_rows[k]);
  return model.mean + cross * w;
}

StateMatrix lmmse_recover(const NoisyObservations& obs, const LmmseModel& model) {
  model.validate();
  const int n = obs.mask.n_rows;
  const int l = obs.mask.n_cols;
  if (model.dimension() != n)
    throw std::invalid_argument("model dimension does not match observations");

  StateMatrix estimate;
  estimate.values.resize(n, l);
  const auto groups = group_columns_by_pattern(obs.mask);
  for (const auto& cols : groups) {
    const auto& rows = obs.mask.observed[static_cast<size_t>(cols.front())];
    if (rows.empty()) {
      for (int j : cols) estimate.values.col(j) = model.mean;
      continue;
    }
    const auto llt = observation_gram(model.covariance, rows, model.noise_variance);
    Eigen::MatrixXd cross(n, static_cast<Eigen::Index>(rows.size()));
    for (size_t k = 0; k < rows.size(); ++k)
      cross.col(static_cast<Eigen::Index>(k)) = model.covariance.col(rows[k]);
    Eigen::VectorXd mean_obs(static_cast<Eigen::Index>(rows.size()));
    for (size_t k = 0; k < rows.size(); ++k)
      mean_obs(static_cast<Eigen::Index>(k)) = model.mean(rows[k]);
    for (int j : cols) {
      const Eigen::VectorXd y = obs.column_values(j);
      const Eigen::VectorXd w = llt.solve(y - mean_obs);
      estimate.values.col(j) = model.mean + cross * w;
    }
  }
  return estimate;
}

double lmmse_posterior_distortion(const ObservationMask& mask, const LmmseModel& model) {
  model.validate();
  if (model.dimension() != mask.n_rows)
    throw std::invalid_argument("model dimension does not match mask");
  const long long missing_total = mask.missing_count();
  if (missing_total == 0) return 0.0;

  double sum = 0.0;
  const auto groups = group_columns_by_pattern(mask);
  for (const auto& cols : groups) {
    const auto& rows = mask.observed[static_cast<size_t>(cols.front())];
    const auto miss = mask.missing_rows(cols.front());
    if (miss.empty()) continue;
    double group_sum = 0.0;
    if (rows.empty()) {
      for (int i : miss) group_sum += model.covariance(i, i);
    } else {
      const auto llt = observation_gram(model.covariance, rows, model.noise_variance);
      const Eigen::MatrixXd cross = submatrix(model.covariance, miss, rows);
      const Eigen::MatrixXd solved = llt.solve(cross.transpose());  // o x c
      for (size_t i = 0; i < miss.size(); ++i) {
        const double reduction =
            cross.row(static_cast<Eigen::Index>(i))
                .dot(solved.col(static_cast<Eigen::Index>(i)));
        const double var = model.covariance(miss[i], miss[i]) - reduction;
        group_sum += var > 0.0 ? var : 0.0;
      }
    }
    sum += group_sum * static_cast<double>(cols.size());
  }
  return sum / static_cast<double>(missing_total);
}

}  // namespace mdr
