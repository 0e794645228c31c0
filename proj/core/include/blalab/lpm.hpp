// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "blalab/spectral.hpp"

namespace blalab {

/// Local polynomial method settings.
///
/// `lines` optionally restricts both the estimation bins and the window
/// members to an explicit ascending subset of `band` (for instance the
/// excited lines of an odd multisine). When empty every bin in `band` is used
/// and window offsets are consecutive integers.
struct LpmConfig {
  int poly_order = 2;   // R
  int half_window = 3;  // n
  BinRange band;
  std::vector<int> lines;
  bool estimate_noise_var = false;

  int rows() const { return 2 * half_window + 1; }
  int params() const { return 2 * (poly_order + 1); }
  int dof() const { return rows() - params(); }

  /// R = 2 and n = R + 1, or n = R + 2 when a noise variance is requested.
  static LpmConfig defaults(BinRange band, bool estimate_noise_var);

  /// Estimation bins: `lines` if set, otherwise every bin in `band`.
  std::vector<int> estimation_lines() const;

  void validate() const;
  bool operator==(const LpmConfig&) const = default;
};

/// Window of 2n+1 lines used for one local solve.
///
/// Offsets are measured from the window centre; near the band edges the window
/// is shifted inwards and the estimate is read off the local polynomial at
/// `eval_offset` instead of at zero.
struct LocalWindow {
  int target_bin = 0;
  int center_bin = 0;
  std::vector<int> bins;
  std::vector<int> offsets;
  int eval_offset = 0;
};

LocalWindow local_window(std::span<const int> lines, int half_window, std::size_t target_index);

/// Local parameters: polynomial coefficients of the plant (g, g_1..g_R) and one
/// coefficient block per transient input (t, t_1..t_R).
struct LocalTheta {
  ComplexVector plant;
  std::vector<ComplexVector> transients;

  Complex g() const { return plant.front(); }
  Complex t() const { return transients.front().front(); }
  ComplexVector g_derivs() const { return {plant.begin() + 1, plant.end()}; }
  ComplexVector t_derivs() const { return {transients.front().begin() + 1, transients.front().end()}; }
};

struct LocalSolution {
  LocalTheta theta;
  Eigen::VectorXcd residual;
  Complex g_eval;                 // plant polynomial at the window's eval offset
  std::vector<Complex> t_eval;    // each transient polynomial at the eval offset
  double noise_var = 0.0;         // NaN when dof == 0
  double g_var = 0.0;             // NaN when dof == 0
  int dof = 0;
};

/// Rows [U(k+r) r^0 .. U(k+r) r^R | r^0 .. r^R]; (2n+1) x 2(R+1).
Eigen::MatrixXcd build_local_regressor(const SpectrumRecord& input, const LocalWindow& window, int poly_order);

Eigen::VectorXcd gather_window(const SpectrumRecord& spectrum, const LocalWindow& window);

/// Least-squares solve of y = K theta through a column-pivoted QR of the
/// column-normalised regressor. K's columns are grouped in blocks of R+1:
/// the first block is the plant, the remaining ones are transient inputs.
LocalSolution solve_local(const Eigen::MatrixXcd& regressor, const Eigen::VectorXcd& output, int poly_order,
                          int eval_offset = 0);

/// Nonparametric FRF estimate on a bin grid.
struct FrfEstimate {
  std::vector<int> bins;
  ComplexVector g_bla;
  ComplexVector transient;
  std::vector<double> noise_var;
  std::vector<double> g_var;
  std::vector<int> dof;
  LpmConfig config;
  double sample_rate_hz = 50.0;
  int n_lines = 0;  // DFT length N of the underlying spectra
  /// One entry per splice point (concatenated estimates only), each parallel to `bins`.
  std::vector<ComplexVector> splice_transients;
  std::vector<OperatingPoint> members;
  std::vector<std::string> warnings;

  std::size_t size() const { return bins.size(); }
  double freq_hz(std::size_t i) const { return bins[i] * sample_rate_hz / n_lines; }
  void validate() const;
};

FrfEstimate estimate_frf(const SpectrumRecord& input, const SpectrumRecord& output, const LpmConfig& config);

/// Picks the lines of `estimate` whose frequencies coincide (to 1e-9 Hz) with
/// `freqs_hz`. Throws ConfigError if any frequency has no matching line.
FrfEstimate select_lines_at(const FrfEstimate& estimate, std::span<const double> freqs_hz);

namespace detail {

/// Shared per-bin loop for the SISO and concatenated estimators.
/// `splice_offsets` are sample offsets of each transient Dirac input within a
/// record of length `total_length`; {0} reproduces the SISO regressor.
FrfEstimate estimate_with_transients(const SpectrumRecord& input, const SpectrumRecord& output,
                                     std::span<const int> lines, int poly_order, int half_window,
                                     std::span<const int> splice_offsets, int total_length);

Eigen::MatrixXcd build_regressor(const SpectrumRecord& input, const LocalWindow& window, int poly_order,
                                 std::span<const int> splice_offsets, int total_length);

}  // namespace detail

}  // namespace blalab
