// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "blalab/spectral.hpp"

namespace blalab {

/// Partition of the in-band bins of an odd multisine.
struct LineClasses {
  std::vector<int> excited;
  std::vector<int> odd_detect;
  std::vector<int> even;
};

LineClasses classify_lines(const MultisineSpec& spec);

struct LineLevels {
  std::vector<int> bins;
  std::vector<double> level_db;

  /// Power mean of the levels, in dB.
  double mean_db() const;
  double max_db() const;
};

/// Output levels per line class plus the noise floor.
///
/// The three line classes partition the band. The noise floor is the standard
/// deviation of the period-averaged spectrum, reported for every in-band bin.
struct DistortionReport {
  LineLevels excited;
  LineLevels odd_nl;
  LineLevels even_nl;
  LineLevels noise_floor;
  OperatingPoint meta;
  double sample_rate_hz = 50.0;
  int n_lines = 0;
  int n_periods = 0;

  /// Power-mean noise floor over the bins of `levels`.
  double noise_floor_mean_db(const LineLevels& levels) const;
};

/// Levels below this floor are clamped so every reported value is finite.
inline constexpr double kLevelFloorDb = -300.0;

DistortionReport analyze_distortions(std::span<const SpectrumRecord> output_periods, const MultisineSpec& spec);

}  // namespace blalab
