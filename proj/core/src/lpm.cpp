// SPDX-License-Identifier: Apache-2.0
#include "blalab/lpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "blalab/errors.hpp"

namespace blalab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Relative pivot threshold below which the local regressor counts as rank
// deficient (columns are unit norm at that point).
constexpr double kRankThreshold = 1e-10;

double int_power(int base, int exponent) {
  double out = 1.0;  // 0^0 == 1
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

Complex splice_phase(int bin, int offset, int total_length) {
  if (offset == 0) return {1.0, 0.0};
  // Reduce k * offset modulo N before scaling to keep the angle small.
  const auto product = static_cast<long long>(bin) * offset;
  const auto reduced = ((product % total_length) + total_length) % total_length;
  const double angle = -2.0 * std::numbers::pi * static_cast<double>(reduced) / total_length;
  return std::polar(1.0, angle);
}

}  // namespace

LpmConfig LpmConfig::defaults(BinRange band, bool estimate_noise_var) {
  LpmConfig config;
  config.poly_order = 2;
  config.half_window = estimate_noise_var ? config.poly_order + 2 : config.poly_order + 1;
  config.band = band;
  config.estimate_noise_var = estimate_noise_var;
  return config;
}

std::vector<int> LpmConfig::estimation_lines() const {
  if (!lines.empty()) return lines;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(band.count()));
  for (int k = band.lo; k <= band.hi; ++k) out.push_back(k);
  return out;
}

void LpmConfig::validate() const {
  if (poly_order < 1) throw ConfigError("lpm: polynomial order R must be at least 1");
  if (half_window < poly_order + 1) {
    throw ConfigError("lpm: half window n = " + std::to_string(half_window) + " violates n >= R + 1 = " +
                      std::to_string(poly_order + 1));
  }
  if (band.lo < 1 || band.count() < 1) throw ConfigError("lpm: band must be non-empty and exclude bin 0");
  if (estimate_noise_var && dof() < 1) {
    throw ConfigError("lpm: noise variance requires 2n + 1 > 2(R + 1)");
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!band.contains(lines[i])) throw ConfigError("lpm: line " + std::to_string(lines[i]) + " outside band");
    if (i > 0 && lines[i] <= lines[i - 1]) throw ConfigError("lpm: lines must be strictly increasing");
  }
  const auto available = lines.empty() ? band.count() : static_cast<int>(lines.size());
  if (available < rows()) {
    throw ConfigError("lpm: band holds " + std::to_string(available) + " lines, window needs 2n + 1 = " +
                      std::to_string(rows()));
  }
}

void FrfEstimate::validate() const {
  const auto n = bins.size();
  if (g_bla.size() != n || transient.size() != n || noise_var.size() != n || g_var.size() != n || dof.size() != n) {
    throw ConfigError("frf estimate: per-bin arrays differ in length");
  }
  for (const auto& block : splice_transients) {
    if (block.size() != n) throw ConfigError("frf estimate: splice transient length mismatch");
  }
  if (n_lines < 1 || !(sample_rate_hz > 0.0)) throw ConfigError("frf estimate: invalid grid metadata");
}

LocalWindow local_window(std::span<const int> lines, int half_window, std::size_t target_index) {
  const auto width = static_cast<std::size_t>(2 * half_window + 1);
  if (lines.size() < width) throw ConfigError("lpm: fewer lines than the window width");
  if (target_index >= lines.size()) throw ConfigError("lpm: window target outside the line set");
  const auto n = static_cast<std::size_t>(half_window);
  const std::size_t start = std::min(target_index > n ? target_index - n : 0, lines.size() - width);
  LocalWindow w;
  w.target_bin = lines[target_index];
  w.center_bin = lines[start + n];
  w.bins.assign(lines.begin() + static_cast<std::ptrdiff_t>(start),
                lines.begin() + static_cast<std::ptrdiff_t>(start + width));
  w.offsets.reserve(width);
  for (int b : w.bins) w.offsets.push_back(b - w.center_bin);
  w.eval_offset = w.target_bin - w.center_bin;
  return w;
}

namespace detail {

Eigen::MatrixXcd build_regressor(const SpectrumRecord& input, const LocalWindow& window, int poly_order,
                                 std::span<const int> splice_offsets, int total_length) {
  const int rows = static_cast<int>(window.bins.size());
  const int block = poly_order + 1;
  const int blocks = 1 + static_cast<int>(splice_offsets.size());
  Eigen::MatrixXcd k(rows, block * blocks);
  for (int i = 0; i < rows; ++i) {
    const int bin = window.bins[static_cast<std::size_t>(i)];
    if (bin < 0 || bin >= input.size()) {
      throw ConfigError("lpm: window line " + std::to_string(bin) + " exits the spectrum");
    }
    const int r = window.offsets[static_cast<std::size_t>(i)];
    const Complex u = input[bin];
    for (int s = 0; s < block; ++s) {
      const double power = int_power(r, s);
      k(i, s) = u * power;
      for (int m = 0; m < static_cast<int>(splice_offsets.size()); ++m) {
        k(i, (m + 1) * block + s) = splice_phase(bin, splice_offsets[static_cast<std::size_t>(m)], total_length) * power;
      }
    }
  }
  return k;
}

FrfEstimate estimate_with_transients(const SpectrumRecord& input, const SpectrumRecord& output,
                                     std::span<const int> lines, int poly_order, int half_window,
                                     std::span<const int> splice_offsets, int total_length) {
  if (input.size() != output.size()) throw ConfigError("lpm: input and output spectra differ in length");
  if (input.sample_rate_hz != output.sample_rate_hz) throw ConfigError("lpm: input and output sample rates differ");

  FrfEstimate est;
  est.sample_rate_hz = input.sample_rate_hz;
  est.n_lines = input.size();
  const auto count = lines.size();
  est.bins.assign(lines.begin(), lines.end());
  est.g_bla.resize(count);
  est.transient.resize(count);
  est.noise_var.resize(count);
  est.g_var.resize(count);
  est.dof.resize(count);
  if (splice_offsets.size() > 1) est.splice_transients.assign(splice_offsets.size(), ComplexVector(count));

  for (std::size_t i = 0; i < count; ++i) {
    const auto window = local_window(lines, half_window, i);
    const auto k = build_regressor(input, window, poly_order, splice_offsets, total_length);
    const auto y = gather_window(output, window);
    LocalSolution sol;
    try {
      sol = solve_local(k, y, poly_order, window.eval_offset);
    } catch (const NumericalError& e) {
      throw NumericalError(e.what(), window.target_bin);
    }
    est.g_bla[i] = sol.g_eval;
    est.transient[i] = sol.t_eval.front();
    est.noise_var[i] = sol.noise_var;
    est.g_var[i] = sol.g_var;
    est.dof[i] = sol.dof;
    if (!est.splice_transients.empty()) {
      for (std::size_t m = 0; m < sol.t_eval.size(); ++m) est.splice_transients[m][i] = sol.t_eval[m];
    }
  }
  return est;
}

}  // namespace detail

Eigen::MatrixXcd build_local_regressor(const SpectrumRecord& input, const LocalWindow& window, int poly_order) {
  const int single[] = {0};
  return detail::build_regressor(input, window, poly_order, single, input.size());
}

Eigen::VectorXcd gather_window(const SpectrumRecord& spectrum, const LocalWindow& window) {
  Eigen::VectorXcd y(static_cast<Eigen::Index>(window.bins.size()));
  for (std::size_t i = 0; i < window.bins.size(); ++i) {
    const int bin = window.bins[i];
    if (bin < 0 || bin >= spectrum.size()) {
      throw ConfigError("lpm: window line " + std::to_string(bin) + " exits the spectrum");
    }
    y(static_cast<Eigen::Index>(i)) = spectrum[bin];
  }
  return y;
}

LocalSolution solve_local(const Eigen::MatrixXcd& regressor, const Eigen::VectorXcd& output, int poly_order,
                          int eval_offset) {
  const Eigen::Index block = poly_order + 1;
  const Eigen::Index cols = regressor.cols();
  const Eigen::Index rows = regressor.rows();
  if (poly_order < 0 || cols < 2 * block || cols % block != 0) {
    throw ConfigError("lpm: regressor columns do not match the polynomial order");
  }
  if (output.size() != rows) throw ConfigError("lpm: regressor and output rows differ");
  if (rows < cols) throw NumericalError("unexcited window: fewer lines than parameters");

  Eigen::VectorXd norms = regressor.colwise().norm().transpose();
  const double largest = norms.maxCoeff();
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (!(norms(c) > largest * kRankThreshold)) throw NumericalError("unexcited window");
  }
  const Eigen::MatrixXcd scaled = regressor * norms.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(scaled);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < cols) throw NumericalError("unexcited window");

  const Eigen::VectorXcd theta = qr.solve(output).cwiseQuotient(norms.cast<Complex>());

  LocalSolution sol;
  sol.residual = output - regressor * theta;
  sol.dof = static_cast<int>(rows - cols);

  const Eigen::Index blocks = cols / block;
  sol.theta.plant.assign(theta.data(), theta.data() + block);
  for (Eigen::Index m = 1; m < blocks; ++m) {
    sol.theta.transients.emplace_back(theta.data() + m * block, theta.data() + (m + 1) * block);
  }

  Eigen::VectorXd powers(block);
  for (Eigen::Index s = 0; s < block; ++s) powers(s) = int_power(eval_offset, static_cast<int>(s));
  auto eval_block = [&](Eigen::Index m) {
    Complex acc{0.0, 0.0};
    for (Eigen::Index s = 0; s < block; ++s) acc += theta(m * block + s) * powers(s);
    return acc;
  };
  sol.g_eval = eval_block(0);
  for (Eigen::Index m = 1; m < blocks; ++m) sol.t_eval.push_back(eval_block(m));

  if (sol.dof > 0) {
    sol.noise_var = sol.residual.squaredNorm() / sol.dof;
    // v^H (K^H K)^-1 v = || R^-H P^T D^-1 v ||^2 with K D^-1 P = Q R.
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(cols);
    for (Eigen::Index s = 0; s < block; ++s) w(s) = powers(s) / norms(s);
    const Eigen::VectorXcd permuted = qr.colsPermutation().transpose() * w;
    const auto r = qr.matrixR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
    const Eigen::VectorXcd x = r.adjoint().solve(permuted);
    sol.g_var = sol.noise_var * x.squaredNorm();
  } else {
    sol.noise_var = kNaN;
    sol.g_var = kNaN;
  }
  return sol;
}

FrfEstimate estimate_frf(const SpectrumRecord& input, const SpectrumRecord& output, const LpmConfig& config) {
  config.validate();
  if (config.band.hi >= input.size()) throw ConfigError("lpm: band exceeds the spectrum length");
  const auto lines = config.estimation_lines();
  const int single[] = {0};
  auto est = detail::estimate_with_transients(input, output, lines, config.poly_order, config.half_window, single,
                                              input.size());
  est.config = config;
  est.members.push_back(output.source_meta);
  return est;
}

FrfEstimate select_lines_at(const FrfEstimate& estimate, std::span<const double> freqs_hz) {
  FrfEstimate out;
  out.config = estimate.config;
  out.sample_rate_hz = estimate.sample_rate_hz;
  out.n_lines = estimate.n_lines;
  out.members = estimate.members;
  out.warnings = estimate.warnings;
  out.splice_transients.assign(estimate.splice_transients.size(), {});
  std::size_t cursor = 0;
  for (double f : freqs_hz) {
    const double tol = 1e-9 * std::max(1.0, std::abs(f));
    while (cursor < estimate.size() && estimate.freq_hz(cursor) < f - tol) ++cursor;
    if (cursor >= estimate.size() || std::abs(estimate.freq_hz(cursor) - f) > tol) {
      throw ConfigError("grid mismatch: no line at " + std::to_string(f) + " Hz");
    }
    out.bins.push_back(estimate.bins[cursor]);
    out.g_bla.push_back(estimate.g_bla[cursor]);
    out.transient.push_back(estimate.transient[cursor]);
    out.noise_var.push_back(estimate.noise_var[cursor]);
    out.g_var.push_back(estimate.g_var[cursor]);
    out.dof.push_back(estimate.dof[cursor]);
    for (std::size_t m = 0; m < estimate.splice_transients.size(); ++m) {
      out.splice_transients[m].push_back(estimate.splice_transients[m][cursor]);
    }
  }
  return out;
}

}  // namespace blalab
