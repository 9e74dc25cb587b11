#pragma once

#include <string>
#include <vector>

#include "mdr/rng.hpp"

namespace mdr {

/// The observed index set Omega. Stored per column with sorted row indices;
/// the complement is derived on demand. All indices 0-based.
struct ObservationMask {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<std::vector<int>> observed;  // observed[j] = rows of column j, ascending

  long long size() const { return static_cast<long long>(n_rows) * n_cols; }
  long long observed_count() const;
  long long missing_count() const { return size() - observed_count(); }
  bool is_observed(int row, int col) const;
  std::vector<int> missing_rows(int col) const;

  void validate() const;
};

/// Two-state chain: S1 emits observed, S2 emits missing.
/// p1 = P(S1 -> S2), p2 = P(S2 -> S1).
struct MarkovSamplerParams {
  double p1 = 0.0;
  double p2 = 1.0;

  double stationary_missing() const { return p1 / (p1 + p2); }
  void validate() const;
};

enum class MarkovCalibration { paper, geometric };

/// Each entry observed independently with probability 1 - gamma.
ObservationMask uniform_mask(int n_rows, int n_cols, double gamma, RandomStream& rng);

/// One chain traverses entries column-major (down each feeder's time series,
/// then the next feeder); the initial state is drawn from the stationary
/// distribution.
ObservationMask markov_mask(int n_rows, int n_cols, const MarkovSamplerParams& params,
                            RandomStream& rng);

/// Solves for (p1, p2) from a target missing ratio and mean missing-run length.
/// paper mode: E[L0] = (1 - E[gamma]) (1 - p2) / p2^2, positive quadratic root.
/// geometric mode: E[L0] = 1/p2.
MarkovSamplerParams markov_params_from_targets(double gamma, double l0,
                                               MarkovCalibration mode);

struct MaskStats {
  double missing_ratio = 0.0;
  double mean_run_length = 0.0;  // mean length of maximal missing runs, column-major
};

MaskStats mask_stats(const ObservationMask& mask);

/// Groups of columns sharing an identical observed-row pattern. Each group is
/// a list of column indices; groups are ordered by first occurrence.
std::vector<std::vector<int>> group_columns_by_pattern(const ObservationMask& mask);

/// CSV of (row, col) observed pairs after two header lines with n_rows, n_cols.
void write_mask_csv(const std::string& path, const ObservationMask& mask);
ObservationMask read_mask_csv(const std::string& path);

}  // namespace mdr
