// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "blalab/svg_plot.hpp"

using namespace blalab;

namespace {

BlaView view(double scale, bool with_variance) {
  BlaView v;
  for (int k = 100; k <= 200; ++k) {
    v.bins.push_back(k);
    v.freq_hz.push_back(k * 0.01);
    v.values.emplace_back(scale / (1.0 + 0.01 * k), -0.1 * scale);
    v.variance.push_back(with_variance ? 1e-4 : std::nan(""));
  }
  return v;
}

DistortionReport report() {
  DistortionReport r;
  r.n_lines = 5000;
  r.excited = {{101, 103}, {-10.0, -11.0}};
  r.odd_nl = {{105}, {-60.0}};
  r.even_nl = {{102, 104}, {-70.0, -72.0}};
  r.noise_floor = {{101, 102, 103, 104, 105}, {-90, -91, -92, -93, -94}};
  return r;
}

bool contains(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("rendering is deterministic") {
  const auto fig = plot::frf_figure(view(1.0, true), "frf");
  const auto a = plot::render_svg(fig);
  const auto b = plot::render_svg(plot::frf_figure(view(1.0, true), "frf"));
  CHECK(a == b);
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(contains(a, "</svg>"));
  CHECK(contains(a, "Frequency (Hz)"));
  CHECK(contains(a, "Magnitude (dB)"));
  CHECK(contains(a, "<polygon"));
  CHECK_FALSE(contains(a, "nan"));
  CHECK_FALSE(contains(a, "inf"));
}

TEST_CASE("bands are omitted without variances") {
  const auto fig = plot::frf_figure(view(1.0, false), "frf");
  CHECK(fig.series.front().band_lo.empty());
  CHECK_FALSE(contains(plot::render_svg(fig), "<polygon"));
}

TEST_CASE("lower band edge stays finite when the deviation exceeds the magnitude") {
  auto v = view(1e-3, true);
  const auto fig = plot::frf_figure(v, "small");
  for (double lo : fig.series.front().band_lo) CHECK(std::isfinite(lo));
}

TEST_CASE("distortion figure colours") {
  const auto fig = plot::distortion_figure(report());
  REQUIRE(fig.series.size() == 4);
  CHECK(fig.series[0].color == "black");
  CHECK(fig.series[1].color == "blue");
  CHECK(fig.series[2].color == "magenta");
  CHECK(fig.series[3].color == "green");
  CHECK(fig.series[1].style == plot::Style::markers);
  CHECK(fig.series[1].x[0] == doctest::Approx(1.01));
  const auto svg = plot::render_svg(fig);
  CHECK(contains(svg, "magenta"));
  CHECK(contains(svg, "<circle"));
}

TEST_CASE("comparison figure") {
  RationalModel m;
  m.b = {0.5};
  const auto with_model = plot::compare_figure(view(1.0, true), view(1.1, true), &m, 5000);
  REQUIRE(with_model.series.size() == 3);
  CHECK(with_model.series[0].color == "green");
  CHECK(with_model.series[1].color == "red");
  CHECK(with_model.series[2].color == "blue");
  CHECK(with_model.series[2].y.front() == doctest::Approx(20.0 * std::log10(0.5)));
  CHECK(plot::compare_figure(view(1.0, true), view(1.1, true)).series.size() == 2);
}
