// SPDX-License-Identifier: Apache-2.0
#include "blalab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace blalab::plot {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

int digits_for(double step) { return step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step))); }

double db(double magnitude) {
  return magnitude > 0.0 ? 20.0 * std::log10(magnitude) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string render_svg(const Figure& figure) {
  Range xr;
  Range yr;
  for (const auto& s : figure.series) {
    for (double x : s.x) xr.add(x);
    for (double y : s.y) yr.add(y);
    for (double y : s.band_lo) yr.add(y);
    for (double y : s.band_hi) yr.add(y);
  }
  xr.finish();
  yr.finish();
  const double x_step = nice_step(xr.hi - xr.lo);
  const double y_step = nice_step(yr.hi - yr.lo);
  yr.lo = std::floor(yr.lo / y_step) * y_step;
  yr.hi = std::ceil(yr.hi / y_step) * y_step;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth, 0) << "\" height=\"" << fmt(kHeight, 0)
    << "\" viewBox=\"0 0 " << fmt(kWidth, 0) << ' ' << fmt(kHeight, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth, 0) << "\" height=\"" << fmt(kHeight, 0) << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(figure.title)
    << "</text>\n";

  // Grid and ticks.
  const int xd = digits_for(x_step);
  const int yd = digits_for(y_step);
  for (double x = std::ceil(xr.lo / x_step) * x_step; x <= xr.hi + 1e-9 * x_step; x += x_step) {
    o << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(px(x)) << "\" y2=\""
      << fmt(kTop + ph) << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << fmt(px(x)) << "\" y=\"" << fmt(kTop + ph + 18) << "\" text-anchor=\"middle\">" << fmt(x, xd)
      << "</text>\n";
  }
  for (double y = yr.lo; y <= yr.hi + 1e-9 * y_step; y += y_step) {
    o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << fmt(kLeft + pw) << "\" y2=\""
      << fmt(py(y)) << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(py(y) + 4) << "\" text-anchor=\"end\">" << fmt(y, yd)
      << "</text>\n";
  }
  o << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 15) << "\" text-anchor=\"middle\">"
    << escape(figure.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << fmt(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(figure.y_label) << "</text>\n";

  for (const auto& s : figure.series) {
    o << "<g id=\"" << escape(s.name) << "\">\n";
    if (!s.band_lo.empty() && s.band_lo.size() == s.x.size() && s.band_hi.size() == s.x.size()) {
      std::ostringstream pts;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (std::isfinite(s.band_hi[i])) pts << fmt(px(s.x[i])) << ',' << fmt(py(s.band_hi[i])) << ' ';
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        if (std::isfinite(s.band_lo[i])) pts << fmt(px(s.x[i])) << ',' << fmt(py(std::max(s.band_lo[i], yr.lo))) << ' ';
      }
      o << "<polygon points=\"" << pts.str() << "\" fill=\"" << s.color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    if (s.style == Style::line) {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (std::isfinite(s.y[i])) o << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
      }
      o << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i])) continue;
        o << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\"2\" fill=\"" << s.color
          << "\"/>\n";
      }
    }
    o << "</g>\n";
  }

  // Legend.
  double ly = kTop + 10;
  for (const auto& s : figure.series) {
    const double lx = kLeft + pw + 15;
    if (s.style == Style::line) {
      o << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 20) << "\" y2=\"" << fmt(ly)
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    } else {
      o << "<circle cx=\"" << fmt(lx + 10) << "\" cy=\"" << fmt(ly) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    }
    o << "<text x=\"" << fmt(lx + 26) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(s.name) << "</text>\n";
    ly += 18;
  }
  o << "</svg>\n";
  return o.str();
}

Figure frf_figure(const BlaView& estimate, const std::string& name, const std::string& color) {
  Figure fig;
  fig.title = name;
  Series s;
  s.name = name;
  s.color = color;
  s.x = estimate.freq_hz;
  bool has_band = false;
  for (std::size_t i = 0; i < estimate.values.size(); ++i) {
    const double mag = std::abs(estimate.values[i]);
    s.y.push_back(db(mag));
    const double sd = i < estimate.variance.size() ? std::sqrt(estimate.variance[i]) : std::nan("");
    if (std::isfinite(sd)) has_band = true;
    s.band_hi.push_back(std::isfinite(sd) ? db(mag + sd) : db(mag));
    s.band_lo.push_back(std::isfinite(sd) && mag > sd ? db(mag - sd) : std::isfinite(sd) ? db(mag) - 40.0 : db(mag));
  }
  if (!has_band) {
    s.band_lo.clear();
    s.band_hi.clear();
  }
  fig.series.push_back(std::move(s));
  return fig;
}

Figure distortion_figure(const DistortionReport& report) {
  Figure fig;
  fig.title = "Output spectrum by line class";
  fig.y_label = "Level (dB)";
  const double f0 = report.n_lines > 0 ? report.sample_rate_hz / report.n_lines : 1.0;
  auto add = [&](const LineLevels& levels, const char* name, const char* color, Style style) {
    Series s;
    s.name = name;
    s.color = color;
    s.style = style;
    for (std::size_t i = 0; i < levels.bins.size(); ++i) {
      s.x.push_back(levels.bins[i] * f0);
      s.y.push_back(levels.level_db[i]);
    }
    fig.series.push_back(std::move(s));
  };
  add(report.noise_floor, "noise", "black", Style::line);
  add(report.excited, "excited", "blue", Style::markers);
  add(report.odd_nl, "odd NL", "magenta", Style::markers);
  add(report.even_nl, "even NL", "green", Style::markers);
  return fig;
}

Figure compare_figure(const BlaView& averaged, const BlaView& concatenated, const RationalModel* model, int n_lines) {
  Figure fig;
  fig.title = "Averaged vs concatenated BLA";
  Figure a = frf_figure(averaged, "averaged", "green");
  Figure c = frf_figure(concatenated, "concatenated", "red");
  fig.series.push_back(std::move(a.series.front()));
  fig.series.push_back(std::move(c.series.front()));
  if (model && n_lines > 0) {
    Series s;
    s.name = "parametric fit";
    s.color = "blue";
    s.x = averaged.freq_hz;
    for (int bin : averaged.bins) s.y.push_back(db(std::abs(model->response(2.0 * std::numbers::pi * bin / n_lines))));
    fig.series.push_back(std::move(s));
  }
  return fig;
}

}  // namespace blalab::plot
