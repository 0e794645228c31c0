// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "blalab/concat_lpm.hpp"
#include "blalab/errors.hpp"
#include "blalab/simulator.hpp"
#include "oracles.hpp"

using namespace blalab;

namespace {

constexpr double kPi = std::numbers::pi;

MultisineSpec full_spec(std::uint64_t seed, int n = 5000) {
  MultisineDesign d;
  d.grid_kind = GridKind::full;
  d.samples_per_period = n;
  d.seed = seed;
  return design_multisine(d);
}

Subrecord run(const WienerSurrogate& sys, const MultisineSpec& spec, std::uint64_t seed, int length = 0) {
  auto u = render_multisine(spec, 1);
  if (length > 0) {
    u.samples.resize(static_cast<std::size_t>(length));
    u.samples_per_period = length;
  }
  const auto y = simulate(sys, u, seed);
  return {u.samples, y.samples, {}};
}

WienerSurrogate with_state(std::vector<double> state) {
  auto sys = WienerSurrogate::default_surrogate();
  sys.initial_state = std::move(state);
  return sys;
}

double max_rel_err(const FrfEstimate& est, const RationalModel& model) {
  double worst = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const auto truth = oracle::rational_at(model.b, model.a, 2.0 * kPi * est.bins[i] / est.n_lines);
    worst = std::max(worst, std::abs(est.g_bla[i] - truth) / std::abs(truth));
  }
  return worst;
}

ConcatConfig concat_config(BinRange band, int n, bool noise = true) {
  ConcatConfig c;
  c.poly_order = 2;
  c.half_window = n;
  c.band = band;
  c.estimate_noise_var = noise;
  return c;
}

}  // namespace

TEST_CASE("concatenated transform has the combined resolution") {
  const auto spec = full_spec(1);
  ConcatDataset ds;
  ds.subrecords = {run(WienerSurrogate::default_surrogate(), spec, 1), run(WienerSurrogate::default_surrogate(), spec, 2)};
  const auto s = concat_and_transform(ds);
  CHECK(s.total_length == 10000);
  CHECK(s.input.size() == 10000);
  CHECK(s.input.freq_hz(1) == doctest::Approx(0.005));
  CHECK(ds.splice_indices() == std::vector<int>{0, 5000});
}

TEST_CASE("a single sub-record transforms like the record itself") {
  const auto spec = full_spec(2);
  ConcatDataset ds;
  ds.subrecords = {run(WienerSurrogate::default_surrogate(), spec, 1)};
  const auto s = concat_and_transform(ds);
  const auto ref = dft(ds.subrecords[0].u, 50.0);
  CHECK(s.input.lines == ref.lines);
}

TEST_CASE("a periodic signal concatenated with itself equals two periods") {
  const auto spec = full_spec(3, 1000);
  const auto period = render_period(spec);
  ConcatDataset ds;
  ds.subrecords = {{period, period, {}}, {period, period, {}}};
  const auto s = concat_and_transform(ds);
  const auto two = render_multisine(spec, 2);
  const auto ref = dft(two);
  for (int k = 0; k < 2000; ++k) CHECK(std::abs(s.input[k] - ref[k]) < 1e-12);
}

TEST_CASE("regressor blocks and splice phase factors") {
  const auto spec = full_spec(4, 1000);
  const auto u = dft(render_multisine(spec, 2));
  std::vector<int> lines;
  for (int k = 40; k <= 80; ++k) lines.push_back(k);
  const auto w = local_window(lines, 4, 20);
  const std::vector<int> splices{0, 700, 1300};
  const auto K = build_concat_regressor(u, w, splices, 2000, 1);
  REQUIRE(K.rows() == 9);
  REQUIRE(K.cols() == 2 * 4);
  const auto siso = build_local_regressor(u, w, 1);
  CHECK(K.leftCols(4) == siso);
  for (int i = 0; i < 9; ++i) {
    const int bin = w.bins[static_cast<std::size_t>(i)];
    const int r = w.offsets[static_cast<std::size_t>(i)];
    for (std::size_t m = 1; m < splices.size(); ++m) {
      const long double angle = -2.0L * std::numbers::pi_v<long double> * bin * splices[m] / 2000.0L;
      const Complex phase(static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle)));
      const int col = 2 * (static_cast<int>(m) + 1);
      CHECK(std::abs(K(i, col) - phase) < 1e-12);
      CHECK(std::abs(K(i, col + 1) - phase * static_cast<double>(r)) < 1e-11);
    }
  }
  const std::vector<int> bad{100, 200};
  CHECK_THROWS_AS(build_concat_regressor(u, w, bad, 2000, 1), ConfigError);
}

TEST_CASE("window inequality") {
  // R = 1, N_c = 2: six parameters.
  ConcatConfig c = concat_config({10, 100}, 2, false);
  c.poly_order = 1;
  CHECK_THROWS_AS(c.validate(2), ConfigError);
  c.half_window = 3;
  CHECK_NOTHROW(c.validate(2));
  c.estimate_noise_var = true;
  CHECK_NOTHROW(c.validate(2));

  const auto small = concat_config({10, 100}, 3);
  try {
    small.validate(2);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("2n+1 >= (R+1)(1+N_c)") != std::string::npos);
  }
  const auto d = ConcatConfig::defaults({10, 100}, 2);
  CHECK(d.half_window == 6);
  CHECK_NOTHROW(d.validate(2));
  CHECK(ConcatConfig::defaults({10, 100}, 3).half_window == 7);
}

TEST_CASE("one sub-record reproduces the single-record estimator") {
  const auto spec = full_spec(5);
  ConcatDataset ds;
  ds.subrecords = {run(with_state({1.0, 2.0, -1.0}), spec, 1)};
  const auto est = estimate_frf_concat(ds, concat_config(spec.band, 4));
  LpmConfig lc;
  lc.poly_order = 2;
  lc.half_window = 4;
  lc.band = spec.band;
  lc.estimate_noise_var = true;
  const auto ref = estimate_frf(dft(ds.subrecords[0].u, 50.0), dft(ds.subrecords[0].y, 50.0), lc);
  CHECK(est.bins == ref.bins);
  CHECK(est.g_bla == ref.g_bla);
  CHECK(est.transient == ref.transient);
}

TEST_CASE("splice transients are removed") {
  const auto spec = full_spec(6);
  ConcatDataset ds;
  ds.subrecords = {run(with_state({4.0, -2.0, 3.0}), spec, 1), run(with_state({-3.0, 5.0, 1.0}), spec, 2)};
  const BinRange band{200, 1000};
  const auto est = estimate_frf_concat(ds, concat_config(band, 6));
  const auto linear = WienerSurrogate::default_surrogate().linear;
  CHECK(max_rel_err(est, linear) < 1e-4);
  CHECK(est.splice_transients.size() == 2);
  for (std::size_t i = 0; i < est.size(); ++i) CHECK(est.dof[i] == 13 - 9);

  ConcatDataset blind;
  blind.subrecords = {{ds.subrecords[0].u, ds.subrecords[0].y, {}}};
  blind.subrecords[0].u.insert(blind.subrecords[0].u.end(), ds.subrecords[1].u.begin(), ds.subrecords[1].u.end());
  blind.subrecords[0].y.insert(blind.subrecords[0].y.end(), ds.subrecords[1].y.begin(), ds.subrecords[1].y.end());
  const auto naive = estimate_frf_concat(blind, concat_config(band, 6));
  CHECK(max_rel_err(naive, linear) >= 1e-2);
}

TEST_CASE("continuous data needs no splice blocks") {
  // Two different realisations played back to back through one continuous run.
  auto u = render_multisine(full_spec(7), 1);
  const auto second = render_multisine(full_spec(8), 1);
  u.samples.insert(u.samples.end(), second.samples.begin(), second.samples.end());
  u.samples_per_period = 10000;
  const auto y = simulate(with_state({2.0, 1.0, -1.0}), u, 1);
  const std::size_t half = 5000;
  ConcatDataset pieces;
  pieces.subrecords = {{{u.samples.begin(), u.samples.begin() + half}, {y.samples.begin(), y.samples.begin() + half}, {}},
                       {{u.samples.begin() + half, u.samples.end()}, {y.samples.begin() + half, y.samples.end()}, {}}};
  ConcatDataset whole;
  whole.subrecords = {{u.samples, y.samples, {}}};
  const BinRange band{200, 1000};
  const auto a = estimate_frf_concat(pieces, concat_config(band, 6));
  const auto b = estimate_frf_concat(whole, concat_config(band, 6));
  const auto linear = WienerSurrogate::default_surrogate().linear;
  const double err_a = max_rel_err(a, linear);
  const double err_b = max_rel_err(b, linear);
  CHECK(err_a < 1e-4);
  CHECK(err_b < 1e-4);
  // The extra splice block has nothing to absorb beyond interpolation error.
  double t_peak = 0.0, y_peak = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    t_peak = std::max(t_peak, std::abs(a.splice_transients[1][i]));
    y_peak = std::max(y_peak, std::abs(a.g_bla[i]));
  }
  CHECK(t_peak < 1e-4 * y_peak);
}

TEST_CASE("unequal sub-record lengths") {
  const auto spec = full_spec(8, 7000);
  ConcatDataset ds;
  ds.subrecords = {run(with_state({1.0, 0.0, 0.0}), spec, 1, 3000), run(with_state({0.0, 2.0, 0.0}), spec, 2, 5000),
                   run(with_state({0.0, 0.0, 3.0}), spec, 3, 7000)};
  CHECK(ds.total_length() == 15000);
  const BinRange band = band_to_bins(1.0, 5.0, 50.0, 15000);
  const auto est = estimate_frf_concat(ds, concat_config(band, 7));
  CHECK(est.size() == static_cast<std::size_t>(band.count()));
  for (std::size_t i = 0; i < est.size(); ++i) {
    CHECK(std::isfinite(est.g_bla[i].real()));
    CHECK(std::isfinite(est.g_var[i]));
    CHECK(est.dof[i] == 15 - 12);
  }
}

TEST_CASE("longer sub-records leak less") {
  const auto linear = WienerSurrogate::default_surrogate().linear;
  double previous = std::numeric_limits<double>::infinity();
  for (int n : {5000, 10000}) {
    const auto spec = full_spec(9, n);
    ConcatDataset ds;
    ds.subrecords = {run(with_state({4.0, -2.0, 3.0}), spec, 1), run(with_state({-3.0, 5.0, 1.0}), spec, 2)};
    const auto band = band_to_bins(1.0, 5.0, 50.0, 2 * n);
    const double err = max_rel_err(estimate_frf_concat(ds, concat_config(band, 6)), linear);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("mixed operating points produce a warning") {
  const auto spec = full_spec(10);
  ConcatDataset ds;
  ds.subrecords = {run(WienerSurrogate::default_surrogate(), spec, 1), run(WienerSurrogate::default_surrogate(), spec, 2)};
  const BinRange band{200, 1000};
  CHECK(estimate_frf_concat(ds, concat_config(band, 6)).warnings.empty());
  ds.subrecords[1].meta.soc_pct = 80.0;
  const auto est = estimate_frf_concat(ds, concat_config(band, 6));
  CHECK(est.warnings.size() == 1);
  CHECK(est.members.size() == 2);
}

TEST_CASE("dataset preconditions") {
  ConcatDataset ds;
  CHECK_THROWS_AS(ds.validate(), ConfigError);
  ds.subrecords = {{{1.0, 2.0}, {1.0}, {}}};
  CHECK_THROWS_AS(ds.validate(), ConfigError);
}
