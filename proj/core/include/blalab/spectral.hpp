// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <span>
#include <vector>

#include "blalab/signal.hpp"

namespace blalab {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// DFT lines X(k), k = 0..N-1, scaled by 1/sqrt(N).
struct SpectrumRecord {
  ComplexVector lines;
  double sample_rate_hz = 50.0;
  int n_avg = 1;
  OperatingPoint source_meta;

  int size() const { return static_cast<int>(lines.size()); }
  double freq_hz(int bin) const { return bin * sample_rate_hz / static_cast<double>(lines.size()); }
  const Complex& operator[](int bin) const { return lines[static_cast<std::size_t>(bin)]; }
};

/// X(k) = (1/sqrt(N)) sum_t x(t) exp(-j 2 pi k t / N).
SpectrumRecord dft(std::span<const double> samples, double sample_rate_hz, const OperatingPoint& meta = {});

/// Treats the whole record as a single frame.
SpectrumRecord dft(const SignalRecord& record);

/// x(t) = (1/sqrt(N)) sum_k X(k) exp(+j 2 pi k t / N).
ComplexVector inverse_dft(std::span<const Complex> lines);

/// Real part of inverse_dft; for spectra of real signals the imaginary part is
/// rounding noise.
std::vector<double> inverse_dft_real(std::span<const Complex> lines);

/// Per-period records, leading `discard_transient_periods` dropped.
std::vector<SignalRecord> split_periods(const SignalRecord& record, int discard_transient_periods);

struct PeriodAverage {
  SpectrumRecord mean;
  /// Complex sample variance per bin with divisor P - 1.
  std::vector<double> sample_variance;
};

PeriodAverage period_average(std::span<const SpectrumRecord> spectra);

}  // namespace blalab
