// SPDX-License-Identifier: Apache-2.0
#include "blalab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "blalab/errors.hpp"
#include "blalab/spectral.hpp"

namespace blalab {

void OperatingPoint::validate() const {
  if (!(soc_pct >= 0.0 && soc_pct <= 100.0)) {
    throw ConfigError("operating point: soc_pct must lie in [0, 100]");
  }
  if (!(rms_a >= 0.0)) {
    throw ConfigError("operating point: rms_a must be non-negative");
  }
  if (!std::isfinite(temperature_c)) {
    throw ConfigError("operating point: temperature_c must be finite");
  }
}

std::string to_string(GridKind kind) {
  switch (kind) {
    case GridKind::full:
      return "full";
    case GridKind::odd:
      return "odd";
    case GridKind::odd_random:
      return "odd_random";
  }
  return "unknown";
}

GridKind grid_kind_from_string(const std::string& name) {
  if (name == "full") return GridKind::full;
  if (name == "odd") return GridKind::odd;
  if (name == "odd_random") return GridKind::odd_random;
  throw ConfigError("unknown grid kind '" + name + "' (expected full, odd or odd_random)");
}

double MultisineSpec::amplitude(int bin) const {
  auto it = std::lower_bound(excited_bins.begin(), excited_bins.end(), bin);
  if (it == excited_bins.end() || *it != bin) return 0.0;
  return amplitudes[static_cast<std::size_t>(it - excited_bins.begin())];
}

bool MultisineSpec::is_excited(int bin) const {
  return std::binary_search(excited_bins.begin(), excited_bins.end(), bin);
}

void MultisineSpec::validate() const {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("multisine: sample_rate_hz must be positive");
  if (samples_per_period < 2) throw ConfigError("multisine: samples_per_period must be at least 2");
  if (excited_bins.empty()) throw ConfigError("multisine: no excited bins");
  if (amplitudes.size() != excited_bins.size() || phases.size() != excited_bins.size()) {
    throw ConfigError("multisine: excited_bins, amplitudes and phases must have equal length");
  }
  if (!(rms_target > 0.0)) throw ConfigError("multisine: rms_target must be positive");
  if (grid_kind == GridKind::odd_random && detection_group_size < 1) {
    throw ConfigError("multisine: detection_group_size must be positive");
  }
  for (std::size_t i = 0; i < excited_bins.size(); ++i) {
    const int k = excited_bins[i];
    if (k < 1 || 2 * k >= samples_per_period) {
      throw ConfigError("multisine: excited bin " + std::to_string(k) + " outside [1, N/2)");
    }
    if (i > 0 && k <= excited_bins[i - 1]) throw ConfigError("multisine: excited bins must be strictly increasing");
    if (grid_kind != GridKind::full && k % 2 == 0) {
      throw ConfigError("multisine: even bin " + std::to_string(k) + " on an odd grid");
    }
    if (!(amplitudes[i] >= 0.0) || !std::isfinite(amplitudes[i])) {
      throw ConfigError("multisine: amplitudes must be finite and non-negative");
    }
  }
}

void SignalRecord::validate() const {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("record: sample_rate_hz must be positive");
  if (samples_per_period < 1 || n_periods < 1) throw ConfigError("record: period metadata must be positive");
  if (samples.size() != static_cast<std::size_t>(samples_per_period) * static_cast<std::size_t>(n_periods)) {
    throw ConfigError("record: length " + std::to_string(samples.size()) + " != samples_per_period * n_periods");
  }
  meta.validate();
}

BinRange band_to_bins(double f_lo_hz, double f_hi_hz, double sample_rate_hz, int n_lines) {
  if (!(sample_rate_hz > 0.0) || n_lines < 2) throw ConfigError("band: invalid sampling grid");
  if (!(f_lo_hz > 0.0 && f_lo_hz < f_hi_hz && f_hi_hz <= sample_rate_hz / 2.0)) {
    throw ConfigError("band: require 0 < f_lo < f_hi <= fs/2");
  }
  const double resolution = sample_rate_hz / n_lines;
  // Tolerate representation error so that 1 Hz at 0.01 Hz resolution is bin 100.
  BinRange range{static_cast<int>(std::ceil(f_lo_hz / resolution - 1e-9)),
                 static_cast<int>(std::floor(f_hi_hz / resolution + 1e-9))};
  range.lo = std::max(range.lo, 1);
  range.hi = std::min(range.hi, (n_lines - 1) / 2);
  if (range.count() < 1) throw ConfigError("band: no integer bin inside the band");
  return range;
}

namespace {

double uniform_phase(std::mt19937_64& rng) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * std::numbers::pi * unit;
}

}  // namespace

MultisineSpec design_multisine(const MultisineDesign& design) {
  if (design.samples_per_period < 2) throw ConfigError("multisine: samples_per_period must be at least 2");
  if (!(design.rms_target > 0.0)) throw ConfigError("multisine: rms_target must be positive");
  if (design.grid_kind == GridKind::odd_random && design.detection_group_size < 1) {
    throw ConfigError("multisine: detection_group_size must be positive");
  }
  MultisineSpec spec;
  spec.sample_rate_hz = design.sample_rate_hz;
  spec.samples_per_period = design.samples_per_period;
  spec.band = band_to_bins(design.f_lo_hz, design.f_hi_hz, design.sample_rate_hz, design.samples_per_period);
  spec.grid_kind = design.grid_kind;
  spec.detection_group_size = design.detection_group_size;
  spec.rms_target = design.rms_target;
  spec.seed = design.seed;

  std::mt19937_64 rng(design.seed);
  std::vector<int> candidates;
  for (int k = spec.band.lo; k <= spec.band.hi; ++k) {
    if (design.grid_kind == GridKind::full || k % 2 != 0) candidates.push_back(k);
  }
  if (design.grid_kind == GridKind::odd_random) {
    const auto group = static_cast<std::size_t>(design.detection_group_size);
    for (std::size_t start = 0; start < candidates.size(); start += group) {
      const std::size_t len = std::min(group, candidates.size() - start);
      std::uniform_int_distribution<std::size_t> pick(0, len - 1);
      const std::size_t removed = start + pick(rng);
      for (std::size_t i = start; i < start + len; ++i) {
        if (i != removed) spec.excited_bins.push_back(candidates[i]);
      }
    }
  } else {
    spec.excited_bins = candidates;
  }
  if (spec.excited_bins.empty()) throw ConfigError("band too narrow for grid");

  spec.phases.reserve(spec.excited_bins.size());
  for (std::size_t i = 0; i < spec.excited_bins.size(); ++i) spec.phases.push_back(uniform_phase(rng));

  // Normalise in the time domain: render with unit lines, then rescale.
  spec.amplitudes.assign(spec.excited_bins.size(), 1.0);
  const auto period = render_period(spec);
  double power = 0.0;
  for (double x : period) power += x * x;
  const double rms = std::sqrt(power / static_cast<double>(period.size()));
  const double scale = design.rms_target / rms;
  for (double& a : spec.amplitudes) a *= scale;
  return spec;
}

std::vector<double> render_period(const MultisineSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.samples_per_period);
  ComplexVector lines(n, Complex{0.0, 0.0});
  const double half_root_n = 0.5 * std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < spec.excited_bins.size(); ++i) {
    const auto k = static_cast<std::size_t>(spec.excited_bins[i]);
    const Complex line = std::polar(half_root_n * spec.amplitudes[i], spec.phases[i]);
    lines[k] = line;
    lines[n - k] = std::conj(line);
  }
  return inverse_dft_real(lines);
}

SignalRecord render_multisine(const MultisineSpec& spec, int n_periods, const OperatingPoint& meta) {
  spec.validate();
  if (n_periods < 1) throw ConfigError("render: n_periods must be positive");
  const auto period = render_period(spec);
  SignalRecord record;
  record.sample_rate_hz = spec.sample_rate_hz;
  record.samples_per_period = spec.samples_per_period;
  record.n_periods = n_periods;
  record.meta = meta;
  record.samples.reserve(period.size() * static_cast<std::size_t>(n_periods));
  for (int p = 0; p < n_periods; ++p) record.samples.insert(record.samples.end(), period.begin(), period.end());
  return record;
}

double riemann_band_power(const MultisineSpec& spec, int k1, int k2) {
  if (k1 >= k2) throw ConfigError("band power: require k1 < k2");
  if (k1 < 1 || 2 * k2 >= spec.samples_per_period) {
    throw ConfigError("band power: bins must lie in [1, N/2)");
  }
  // |U(k)|^2 = N A^2 / 4 on each of the two mirrored lines.
  double power = 0.0;
  for (std::size_t i = 0; i < spec.excited_bins.size(); ++i) {
    const int k = spec.excited_bins[i];
    if (k >= k1 && k <= k2) power += 0.5 * spec.amplitudes[i] * spec.amplitudes[i];
  }
  return power;
}

}  // namespace blalab
