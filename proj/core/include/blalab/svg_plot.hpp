// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "blalab/bla_aggregate.hpp"
#include "blalab/distortion.hpp"
#include "blalab/parametric_fit.hpp"

namespace blalab::plot {

enum class Style { line, markers };

struct Series {
  std::string name;
  std::string color;
  Style style = Style::line;
  std::vector<double> x;
  std::vector<double> y;
  /// Optional shaded band (same length as x) drawn under the series.
  std::vector<double> band_lo;
  std::vector<double> band_hi;
};

struct Figure {
  std::string title;
  std::string x_label = "Frequency (Hz)";
  std::string y_label = "Magnitude (dB)";
  std::vector<Series> series;
};

/// Deterministic SVG text; identical input gives identical bytes.
std::string render_svg(const Figure& figure);

/// Magnitude in dB with a +/- one standard deviation band.
Figure frf_figure(const BlaView& estimate, const std::string& name, const std::string& color = "blue");
/// Excited (blue), odd (magenta), even (green) lines over the black noise floor.
Figure distortion_figure(const DistortionReport& report);
/// Averaged BLA (green) against concatenated BLA (red), optional parametric fit (blue).
Figure compare_figure(const BlaView& averaged, const BlaView& concatenated, const RationalModel* model = nullptr,
                      int n_lines = 0);

}  // namespace blalab::plot
