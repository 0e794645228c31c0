// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace blalab {

/// Conditions under which a record was acquired. Carried as metadata only.
struct OperatingPoint {
  double soc_pct = 50.0;
  double temperature_c = 25.0;
  double rms_a = 0.0;
  std::string label;

  void validate() const;
  bool operator==(const OperatingPoint&) const = default;
};

enum class GridKind { full, odd, odd_random };

std::string to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& name);

/// Inclusive range of DFT bins.
struct BinRange {
  int lo = 0;
  int hi = -1;

  int count() const { return hi >= lo ? hi - lo + 1 : 0; }
  bool contains(int k) const { return k >= lo && k <= hi; }
  bool operator==(const BinRange&) const = default;
};

/// A designed multisine: the excited bin set with per-line amplitude and
/// phase. `excited_bins`, `amplitudes` and `phases` are parallel arrays sorted
/// by bin; every bin not listed has amplitude zero.
struct MultisineSpec {
  double sample_rate_hz = 50.0;
  int samples_per_period = 5000;
  BinRange band;  // in-band bins the grid was drawn from
  std::vector<int> excited_bins;
  std::vector<double> amplitudes;
  std::vector<double> phases;
  GridKind grid_kind = GridKind::odd_random;
  int detection_group_size = 3;
  double rms_target = 10.0;
  std::uint64_t seed = 0;

  double frequency_resolution_hz() const { return sample_rate_hz / samples_per_period; }
  double amplitude(int bin) const;
  bool is_excited(int bin) const;
  void validate() const;
  bool operator==(const MultisineSpec&) const = default;
};

struct MultisineDesign {
  double f_lo_hz = 1.0;
  double f_hi_hz = 5.0;
  double sample_rate_hz = 50.0;
  int samples_per_period = 5000;
  GridKind grid_kind = GridKind::odd_random;
  int detection_group_size = 3;
  double rms_target = 10.0;
  std::uint64_t seed = 0;
};

/// Sampled time-domain data, `samples.size() == samples_per_period * n_periods`.
struct SignalRecord {
  std::vector<double> samples;
  double sample_rate_hz = 50.0;
  int samples_per_period = 0;
  int n_periods = 1;
  OperatingPoint meta;

  std::size_t size() const { return samples.size(); }
  void validate() const;
};

/// Maps [f_lo, f_hi] onto integer bins k with 1 <= k < N/2.
BinRange band_to_bins(double f_lo_hz, double f_hi_hz, double sample_rate_hz, int n_lines);

MultisineSpec design_multisine(const MultisineDesign& design);

/// Real inverse DFT of the spec's line spectrum, replicated over `n_periods`.
SignalRecord render_multisine(const MultisineSpec& spec, int n_periods, const OperatingPoint& meta = {});

/// One period of the rendered signal.
std::vector<double> render_period(const MultisineSpec& spec);

/// (1/N) * sum over k1..k2 of E|U(k)|^2, counting both the positive and the
/// mirrored negative line so that the full-band value equals the mean power.
double riemann_band_power(const MultisineSpec& spec, int k1, int k2);

}  // namespace blalab
