// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "blalab/lpm.hpp"

namespace blalab {

/// Sample mean of M individual BLAs with their sample variance
/// (divisor M - 1). `sample_var` is NaN when M == 1.
struct CommonBla {
  std::vector<int> bins;
  ComplexVector c_bla;
  std::vector<double> sample_var;
  int m_experiments = 0;
  std::vector<OperatingPoint> member_meta;
  double sample_rate_hz = 50.0;
  int n_lines = 0;

  std::size_t size() const { return bins.size(); }
  double freq_hz(std::size_t i) const { return bins[i] * sample_rate_hz / n_lines; }
  bool has_variance() const { return m_experiments >= 2; }
};

CommonBla average_blas(std::span<const FrfEstimate> estimates);

/// Read-only view used to compare the two kinds of estimate. For a CommonBla
/// the variance is that of the mean, sample_var / M.
struct BlaView {
  std::vector<double> freq_hz;
  std::vector<int> bins;
  ComplexVector values;
  std::vector<double> variance;
};

BlaView view_of(const FrfEstimate& estimate);
BlaView view_of(const CommonBla& common);

struct BlaComparison {
  std::vector<int> bins;
  std::vector<double> freq_hz;
  ComplexVector difference;       // a - b
  std::vector<double> gap_db;     // |20 log10 |a| - 20 log10 |b||
  std::vector<double> pooled_std; // sqrt(var_a + var_b), NaN where unavailable
  double max_gap_db = 0.0;
  double mean_gap_db = 0.0;
  double mean_abs_difference = 0.0;
  double mean_pooled_std = 0.0;
  double variance_ratio = 0.0;    // mean var_b / mean var_a
  double fraction_b_var_ge_a = 0.0;
};

/// Requires both views on the same frequency grid.
BlaComparison compare_blas(const BlaView& a, const BlaView& b);

}  // namespace blalab
