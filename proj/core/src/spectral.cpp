// SPDX-License-Identifier: Apache-2.0
#include "blalab/spectral.hpp"

#include <cmath>

#include "blalab/errors.hpp"
#include "fft.hpp"

namespace blalab {

SpectrumRecord dft(std::span<const double> samples, double sample_rate_hz, const OperatingPoint& meta) {
  if (samples.empty()) throw ConfigError("dft: empty record");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("dft: sample_rate_hz must be positive");
  SpectrumRecord out;
  out.lines = detail::fft_real(samples);
  const double scale = 1.0 / std::sqrt(static_cast<double>(samples.size()));
  for (auto& x : out.lines) x *= scale;
  out.sample_rate_hz = sample_rate_hz;
  out.source_meta = meta;
  return out;
}

SpectrumRecord dft(const SignalRecord& record) { return dft(record.samples, record.sample_rate_hz, record.meta); }

ComplexVector inverse_dft(std::span<const Complex> lines) {
  if (lines.empty()) throw ConfigError("inverse dft: empty spectrum");
  auto out = detail::fft(lines, +1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(lines.size()));
  for (auto& x : out) x *= scale;
  return out;
}

std::vector<double> inverse_dft_real(std::span<const Complex> lines) {
  const auto full = inverse_dft(lines);
  std::vector<double> out(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) out[i] = full[i].real();
  return out;
}

std::vector<SignalRecord> split_periods(const SignalRecord& record, int discard_transient_periods) {
  record.validate();
  if (discard_transient_periods < 0) throw ConfigError("split: discard count must be non-negative");
  if (discard_transient_periods >= record.n_periods) {
    throw ConfigError("split: discarding " + std::to_string(discard_transient_periods) + " of " +
                      std::to_string(record.n_periods) + " periods leaves nothing");
  }
  const auto n = static_cast<std::size_t>(record.samples_per_period);
  std::vector<SignalRecord> out;
  for (int p = discard_transient_periods; p < record.n_periods; ++p) {
    SignalRecord period;
    period.sample_rate_hz = record.sample_rate_hz;
    period.samples_per_period = record.samples_per_period;
    period.n_periods = 1;
    period.meta = record.meta;
    const auto first = record.samples.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(p) * n);
    period.samples.assign(first, first + static_cast<std::ptrdiff_t>(n));
    out.push_back(std::move(period));
  }
  return out;
}

PeriodAverage period_average(std::span<const SpectrumRecord> spectra) {
  if (spectra.size() < 2) throw ConfigError("period average: need at least two spectra");
  const auto n = spectra.front().lines.size();
  for (const auto& s : spectra) {
    if (s.lines.size() != n) throw ConfigError("period average: spectra have different lengths");
    if (s.sample_rate_hz != spectra.front().sample_rate_hz) {
      throw ConfigError("period average: spectra have different sample rates");
    }
  }
  const double count = static_cast<double>(spectra.size());
  PeriodAverage out;
  out.mean.sample_rate_hz = spectra.front().sample_rate_hz;
  out.mean.source_meta = spectra.front().source_meta;
  out.mean.n_avg = static_cast<int>(spectra.size());
  out.mean.lines.assign(n, Complex{0.0, 0.0});
  for (const auto& s : spectra) {
    for (std::size_t k = 0; k < n; ++k) out.mean.lines[k] += s.lines[k];
  }
  for (auto& x : out.mean.lines) x /= count;
  out.sample_variance.assign(n, 0.0);
  for (const auto& s : spectra) {
    for (std::size_t k = 0; k < n; ++k) out.sample_variance[k] += std::norm(s.lines[k] - out.mean.lines[k]);
  }
  for (auto& v : out.sample_variance) v /= count - 1.0;
  return out;
}

}  // namespace blalab
