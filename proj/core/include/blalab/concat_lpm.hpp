// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "blalab/lpm.hpp"

namespace blalab {

struct Subrecord {
  std::vector<double> u;
  std::vector<double> y;
  OperatingPoint meta;
};

/// Sub-records of arbitrary length, concatenated in order.
struct ConcatDataset {
  std::vector<Subrecord> subrecords;
  double sample_rate_hz = 50.0;

  int n_concat() const { return static_cast<int>(subrecords.size()); }
  /// Cumulative sample offsets {0, N1, N1+N2, ...}, one per sub-record.
  std::vector<int> splice_indices() const;
  int total_length() const;
  void validate() const;
};

struct ConcatConfig {
  int poly_order = 2;
  int half_window = 6;
  BinRange band;
  std::vector<int> lines;
  bool estimate_noise_var = true;

  int params(int n_concat) const { return (poly_order + 1) * (1 + n_concat); }
  int rows() const { return 2 * half_window + 1; }

  /// R = 2, n = ceil(((R+1)(1+Nc) + 2) / 2).
  static ConcatConfig defaults(BinRange band, int n_concat);

  /// Rejects 2n+1 < (R+1)(1+Nc), and 2n+1 == (R+1)(1+Nc) when a noise
  /// variance is requested.
  void validate(int n_concat) const;
};

struct ConcatSpectra {
  SpectrumRecord input;
  SpectrumRecord output;
  int total_length = 0;
};

/// DFT of the full concatenation with 1/sqrt(sum N_k) scaling.
ConcatSpectra concat_and_transform(const ConcatDataset& dataset);

/// One plant block plus one transient block per splice offset m, the latter
/// multiplied by exp(-j 2 pi (k+r) offset_m / N_total).
Eigen::MatrixXcd build_concat_regressor(const SpectrumRecord& input, const LocalWindow& window,
                                        std::span<const int> splice_indices, int total_length, int poly_order);

/// Common BLA from all sub-records. The result keeps per-splice transient
/// estimates in `splice_transients`; differing operating points are recorded
/// in `warnings`.
FrfEstimate estimate_frf_concat(const ConcatDataset& dataset, const ConcatConfig& config);

}  // namespace blalab
