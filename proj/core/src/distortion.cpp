// SPDX-License-Identifier: Apache-2.0
#include "blalab/distortion.hpp"

#include <algorithm>
#include <cmath>

#include "blalab/errors.hpp"

namespace blalab {
namespace {

double level_db(double magnitude) {
  if (!(magnitude > 0.0)) return kLevelFloorDb;
  return std::max(20.0 * std::log10(magnitude), kLevelFloorDb);
}

double power_mean_db(std::span<const double> levels) {
  if (levels.empty()) return kLevelFloorDb;
  double acc = 0.0;
  for (double l : levels) acc += std::pow(10.0, l / 10.0);
  return std::max(10.0 * std::log10(acc / static_cast<double>(levels.size())), kLevelFloorDb);
}

}  // namespace

double LineLevels::mean_db() const { return power_mean_db(level_db); }

double LineLevels::max_db() const {
  return level_db.empty() ? kLevelFloorDb : *std::max_element(level_db.begin(), level_db.end());
}

double DistortionReport::noise_floor_mean_db(const LineLevels& levels) const {
  std::vector<double> selected;
  for (int bin : levels.bins) {
    auto it = std::lower_bound(noise_floor.bins.begin(), noise_floor.bins.end(), bin);
    if (it != noise_floor.bins.end() && *it == bin) {
      selected.push_back(noise_floor.level_db[static_cast<std::size_t>(it - noise_floor.bins.begin())]);
    }
  }
  return power_mean_db(selected);
}

LineClasses classify_lines(const MultisineSpec& spec) {
  if (spec.grid_kind == GridKind::full) throw ConfigError("no detection lines available");
  LineClasses out;
  for (int k = spec.band.lo; k <= spec.band.hi; ++k) {
    if (k % 2 == 0) {
      out.even.push_back(k);
    } else if (spec.is_excited(k)) {
      out.excited.push_back(k);
    } else {
      out.odd_detect.push_back(k);
    }
  }
  return out;
}

DistortionReport analyze_distortions(std::span<const SpectrumRecord> output_periods, const MultisineSpec& spec) {
  if (output_periods.size() < 2) throw ConfigError("distortion: noise floor needs at least two periods");
  const auto classes = classify_lines(spec);
  for (const auto& p : output_periods) {
    if (p.size() != spec.samples_per_period) {
      throw ConfigError("distortion: period length does not match the multisine period");
    }
  }
  const auto avg = period_average(output_periods);
  const double periods = static_cast<double>(output_periods.size());

  DistortionReport report;
  report.meta = output_periods.front().source_meta;
  report.sample_rate_hz = output_periods.front().sample_rate_hz;
  report.n_lines = spec.samples_per_period;
  report.n_periods = static_cast<int>(output_periods.size());

  auto fill = [&](const std::vector<int>& bins, LineLevels& levels) {
    levels.bins = bins;
    for (int k : bins) levels.level_db.push_back(level_db(std::abs(avg.mean[k])));
  };
  fill(classes.excited, report.excited);
  fill(classes.odd_detect, report.odd_nl);
  fill(classes.even, report.even_nl);
  for (int k = spec.band.lo; k <= spec.band.hi; ++k) {
    report.noise_floor.bins.push_back(k);
    // Standard deviation of the period mean.
    const double std_of_mean = std::sqrt(avg.sample_variance[static_cast<std::size_t>(k)] / periods);
    report.noise_floor.level_db.push_back(level_db(std_of_mean));
  }
  return report;
}

}  // namespace blalab
