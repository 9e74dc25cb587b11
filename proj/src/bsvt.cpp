#include "mdr/bsvt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdr {

void BsvtConfig::validate() const {
  if (!(step_size > 0.0 && step_size < 2.0))
    throw std::invalid_argument("step size must be in (0, 2)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (threshold_grid_size < 2)
    throw std::invalid_argument("threshold_grid_size must be at least 2");
  lmmse_model.validate();
}

namespace {

constexpr double kRepeatTol = 1e-9;

bool has_repeated_values(const Eigen::VectorXd& sv) {
  for (Eigen::Index i = 0; i + 1 < sv.size(); ++i)
    if (sv(i) - sv(i + 1) <= kRepeatTol * std::max(sv(i), sv(i + 1)))
      return true;
  return false;
}

void check_spectrum(const Eigen::VectorXd& sv, int n_rows, int n_cols) {
  if (sv.size() != static_cast<Eigen::Index>(std::min(n_rows, n_cols)))
    throw std::invalid_argument("singular value count must be min(N, L)");
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) < 0.0) throw std::invalid_argument("singular values must be nonnegative");
    if (i > 0 && sv(i) > sv(i - 1))
      throw std::invalid_argument("singular values must be sorted descending");
  }
}

// Prefix-sum form of the risk estimate: O(m^2) setup, O(log m) per threshold.
class SureEvaluator {
 public:
  SureEvaluator(const Eigen::VectorXd& sv, int n_rows, int n_cols)
      : sv_(sv),
        nl_(static_cast<double>(n_rows) * static_cast<double>(n_cols)),
        dim_gap_(std::abs(n_rows - n_cols)),
        degenerate_(has_repeated_values(sv)) {
    const Eigen::Index m = sv_.size();
    suf_sq_.assign(static_cast<size_t>(m) + 1, 0.0);
    for (Eigen::Index i = m - 1; i >= 0; --i)
      suf_sq_[static_cast<size_t>(i)] = suf_sq_[static_cast<size_t>(i) + 1] + sv_(i) * sv_(i);
    pre_inv_.assign(static_cast<size_t>(m) + 1, 0.0);
    pre_c_.assign(static_cast<size_t>(m) + 1, 0.0);
    pre_sc_.assign(static_cast<size_t>(m) + 1, 0.0);
    std::vector<double> c(static_cast<size_t>(m), 0.0);
    if (!degenerate_) {
      for (Eigen::Index i = 0; i < m; ++i) {
        if (sv_(i) == 0.0) continue;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
          if (j == i) continue;
          acc += sv_(i) / (sv_(i) * sv_(i) - sv_(j) * sv_(j));
        }
        c[static_cast<size_t>(i)] = acc;
      }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      pre_inv_[static_cast<size_t>(i) + 1] =
          pre_inv_[static_cast<size_t>(i)] + (sv_(i) > 0.0 ? 1.0 / sv_(i) : 0.0);
      pre_c_[static_cast<size_t>(i) + 1] = pre_c_[static_cast<size_t>(i)] + c[static_cast<size_t>(i)];
      pre_sc_[static_cast<size_t>(i) + 1] =
          pre_sc_[static_cast<size_t>(i)] + sv_(i) * c[static_cast<size_t>(i)];
    }
  }

  double operator()(double tau, double sigma2) const {
    // k = #{sigma_i > tau}; sv_ is descending
    Eigen::Index lo = 0, hi = sv_.size();
    while (lo < hi) {
      const Eigen::Index mid = (lo + hi) / 2;
      if (sv_(mid) > tau) lo = mid + 1; else hi = mid;
    }
    const auto k = static_cast<size_t>(lo);
    const double kd = static_cast<double>(lo);
    const double fit = suf_sq_[k] + kd * tau * tau;
    double div = 0.0;
    if (!degenerate_) {
      div = kd + static_cast<double>(dim_gap_) * (kd - tau * pre_inv_[k]) +
            2.0 * (pre_sc_[k] - tau * pre_c_[k]);
    }
    return -nl_ * sigma2 + fit + 2.0 * sigma2 * div;
  }

 private:
  Eigen::VectorXd sv_;
  double nl_;
  int dim_gap_;
  bool degenerate_;
  std::vector<double> suf_sq_, pre_inv_, pre_c_, pre_sc_;
};

}  // namespace

double sure_risk(const Eigen::VectorXd& singular_values, double tau,
                 double noise_variance, int n_rows, int n_cols) {
  if (noise_variance < 0.0) throw std::domain_error("noise variance must be nonnegative");
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  check_spectrum(singular_values, n_rows, n_cols);
  const Eigen::Index m = singular_values.size();
  const double nl = static_cast<double>(n_rows) * static_cast<double>(n_cols);
  double fit = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    fit += std::min(tau * tau, singular_values(i) * singular_values(i));
  double div = 0.0;
  if (!has_repeated_values(singular_values)) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double si = singular_values(i);
      const double excess = std::max(0.0, si - tau);
      div += si > tau ? 1.0 : 0.0;
      if (si > 0.0) div += std::abs(n_rows - n_cols) * excess / si;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (j == i || excess == 0.0) continue;
        const double sj = singular_values(j);
        div += 2.0 * si * excess / (si * si - sj * sj);
      }
    }
  }
  return -nl * noise_variance + fit + 2.0 * noise_variance * div;
}

double optimal_threshold_from_singular_values(const Eigen::VectorXd& singular_values,
                                              double noise_variance, int grid_size,
                                              int n_rows, int n_cols) {
  if (!(noise_variance > 0.0))
    throw std::invalid_argument("noise variance must be positive");
  if (grid_size < 2) throw std::invalid_argument("grid size must be at least 2");
  check_spectrum(singular_values, n_rows, n_cols);
  const double sigma_max = singular_values.size() > 0 ? singular_values(0) : 0.0;
  if (sigma_max == 0.0) return 0.0;

  std::vector<double> candidates;
  candidates.reserve(static_cast<size_t>(singular_values.size() + grid_size) + 1);
  candidates.push_back(0.0);
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    candidates.push_back(singular_values(i));
  const double step = sigma_max / static_cast<double>(grid_size - 1);
  for (int g = 0; g < grid_size; ++g)
    candidates.push_back(step * static_cast<double>(g));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const SureEvaluator sure(singular_values, n_rows, n_cols);
  double best_tau = candidates.front();
  double best_risk = sure(best_tau, noise_variance);
  for (size_t i = 1; i < candidates.size(); ++i) {
    const double risk = sure(candidates[i], noise_variance);
    if (risk < best_risk) {  // strict: ties keep the smaller tau
      best_risk = risk;
      best_tau = candidates[i];
    }
  }
  return best_tau;
}

double optimal_threshold(const Eigen::MatrixXd& z, double noise_variance,
                         int grid_size) {
  if (!z.allFinite()) throw std::invalid_argument("optimal_threshold input must be finite");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(z);
  return optimal_threshold_from_singular_values(svd.singularValues(), noise_variance,
                                                grid_size, static_cast<int>(z.rows()),
                                                static_cast<int>(z.cols()));
}

double noise_level(const Eigen::MatrixXd& y_k, const NoisyObservations& obs,
                   double d_lmmse) {
  if (d_lmmse < 0.0) throw std::invalid_argument("d_lmmse must be nonnegative");
  double residual_sq = 0.0;
  for (int j = 0; j < obs.mask.n_cols; ++j) {
    const auto& rows = obs.mask.observed[static_cast<size_t>(j)];
    const auto& vals = obs.values[static_cast<size_t>(j)];
    for (size_t t = 0; t < rows.size(); ++t) {
      const double d = y_k(rows[t], j) - vals[t];
      residual_sq += d * d;
    }
  }
  const double nl = static_cast<double>(obs.mask.n_rows) *
                    static_cast<double>(obs.mask.n_cols);
  const double value =
      (residual_sq + static_cast<double>(obs.mask.missing_count()) * d_lmmse) / nl;
  const double floor = 1e-12 * obs.mean_squared_value();
  return std::max(value, floor);
}

namespace {

struct FillGroup {
  std::vector<int> cols;
  std::vector<int> rows;  // observed
  std::vector<int> miss;
  Eigen::LLT<Eigen::MatrixXd> llt;   // of Sigma_oo (+ sigma^2 I when regularized)
  Eigen::MatrixXd cross;             // Sigma_{miss, rows}
  Eigen::VectorXd mean_obs, mean_miss;
};

std::vector<FillGroup> build_fill_groups(const ObservationMask& mask,
                                         const LmmseModel& model,
                                         bool regularized) {
  std::vector<FillGroup> out;
  for (auto& cols : group_columns_by_pattern(mask)) {
    FillGroup g;
    g.cols = cols;
    g.rows = mask.observed[static_cast<size_t>(cols.front())];
    g.miss = mask.missing_rows(cols.front());
    const auto o = static_cast<Eigen::Index>(g.rows.size());
    const auto c = static_cast<Eigen::Index>(g.miss.size());
    g.mean_obs.resize(o);
    for (Eigen::Index t = 0; t < o; ++t) g.mean_obs(t) = model.mean(g.rows[static_cast<size_t>(t)]);
    g.mean_miss.resize(c);
    for (Eigen::Index t = 0; t < c; ++t) g.mean_miss(t) = model.mean(g.miss[static_cast<size_t>(t)]);
    if (o > 0 && c > 0) {
      Eigen::MatrixXd gram(o, o);
      for (Eigen::Index b = 0; b < o; ++b)
        for (Eigen::Index a = 0; a < o; ++a)
          gram(a, b) = model.covariance(g.rows[static_cast<size_t>(a)],
                                        g.rows[static_cast<size_t>(b)]);
      if (regularized) gram.diagonal().array() += model.noise_variance;
      g.llt.compute(gram);
      if (g.llt.info() != Eigen::Success) {
        gram.diagonal().array() +=
            1e-10 * model.covariance.trace() / static_cast<double>(model.covariance.rows());
        g.llt.compute(gram);
        if (g.llt.info() != Eigen::Success)
          throw std::runtime_error("fill-in system is singular");
      }
      g.cross.resize(c, o);
      for (Eigen::Index b = 0; b < o; ++b)
        for (Eigen::Index a = 0; a < c; ++a)
          g.cross(a, b) = model.covariance(g.miss[static_cast<size_t>(a)],
                                           g.rows[static_cast<size_t>(b)]);
    }
    out.push_back(std::move(g));
  }
  return out;
}

Eigen::MatrixXd shrink_from_svd(const Eigen::BDCSVD<Eigen::MatrixXd>& svd, double tau,
                                Eigen::Index n, Eigen::Index l) {
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > tau) ++r;
  if (r == 0) return Eigen::MatrixXd::Zero(n, l);
  const Eigen::VectorXd shrunk = sv.head(r).array() - tau;
  return svd.matrixU().leftCols(r) * shrunk.asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

}  // namespace

BsvtResult bsvt_recover(const NoisyObservations& obs, const BsvtConfig& config) {
  config.validate();
  if (obs.count() == 0)
    throw std::invalid_argument("bsvt_recover needs at least one observation");
  const int n = obs.mask.n_rows;
  const int l = obs.mask.n_cols;
  const LmmseModel& model = config.lmmse_model;
  if (model.dimension() != n)
    throw std::invalid_argument("model dimension does not match observations");

  const double obs_norm = std::sqrt(obs.squared_norm());
  const double d_lmmse = lmmse_posterior_distortion(obs.mask, model);
  const auto groups = build_fill_groups(obs.mask, model, config.regularized_fill);

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, l);  // supported on Omega
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, l);
  Eigen::MatrixXd x;
  Eigen::BDCSVD<Eigen::MatrixXd> svd;
  bool have_svd = false;  // Z^0 = 0 shrinks to zero without an SVD
  double tau = 0.0;
  double sigma2_z = 0.0;

  BsvtResult result;
  for (int k = 1; k <= config.max_iterations; ++k) {
    x = have_svd ? shrink_from_svd(svd, tau, n, l) : Eigen::MatrixXd::Zero(n, l);
    result.iterations = k;
    double residual_sq = 0.0;
    for (int j = 0; j < l; ++j) {
      const auto& rows = obs.mask.observed[static_cast<size_t>(j)];
      const auto& vals = obs.values[static_cast<size_t>(j)];
      for (size_t t = 0; t < rows.size(); ++t) {
        const double d = x(rows[t], j) - vals[t];
        residual_sq += d * d;
      }
    }
    const double num = std::sqrt(residual_sq);
    const double residual = obs_norm > 0.0 ? num / obs_norm : (num > 0.0 ? 1.0 : 0.0);
    result.trace.push_back({k, tau, sigma2_z, residual});
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

    for (const auto& g : groups) {
      const auto o = static_cast<Eigen::Index>(g.rows.size());
      const auto c = static_cast<Eigen::Index>(g.miss.size());
      for (int j : g.cols) {
        auto col = z.col(j);
        if (c > 0) {
          Eigen::VectorXd fill = g.mean_miss;
          if (o > 0) {
            Eigen::VectorXd arg(o);
            if (config.condition_on_observations) {
              const auto& vals = obs.values[static_cast<size_t>(j)];
              for (Eigen::Index t = 0; t < o; ++t)
                arg(t) = vals[static_cast<size_t>(t)] - g.mean_obs(t);
            } else {
              for (Eigen::Index t = 0; t < o; ++t)
                arg(t) = y(g.rows[static_cast<size_t>(t)], j) - g.mean_obs(t);
            }
            fill += g.cross * g.llt.solve(arg);
          }
          for (Eigen::Index t = 0; t < c; ++t) col(g.miss[static_cast<size_t>(t)]) = fill(t);
        }
        for (Eigen::Index t = 0; t < o; ++t) {
          const int row = g.rows[static_cast<size_t>(t)];
          col(row) = y(row, j);  // Z equals Y on Omega exactly
        }
      }
    }

    sigma2_z = noise_level(y, obs, d_lmmse);
    svd.compute(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    have_svd = true;
    tau = optimal_threshold_from_singular_values(svd.singularValues(), sigma2_z,
                                                 config.threshold_grid_size, n, l);
  }
  result.estimate.values = std::move(x);
  return result;
}

}  // namespace mdr
