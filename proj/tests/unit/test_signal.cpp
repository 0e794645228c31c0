// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "blalab/errors.hpp"
#include "blalab/signal.hpp"
#include "blalab/spectral.hpp"
#include "oracles.hpp"

using namespace blalab;

namespace {

MultisineDesign default_design(GridKind kind, std::uint64_t seed = 1) {
  MultisineDesign d;
  d.grid_kind = kind;
  d.seed = seed;
  return d;
}

double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace

TEST_CASE("band edges map to integer bins") {
  const auto band = band_to_bins(1.0, 5.0, 50.0, 5000);
  CHECK(band.lo == 100);
  CHECK(band.hi == 500);
  CHECK(band.count() == 401);
  const auto nyquist = band_to_bins(1.0, 25.0, 50.0, 5000);
  CHECK(nyquist.hi == 2499);
  CHECK_THROWS_AS(band_to_bins(5.0, 1.0, 50.0, 5000), ConfigError);
  CHECK_THROWS_AS(band_to_bins(1.0, 30.0, 50.0, 5000), ConfigError);
}

TEST_CASE("default design arithmetic") {
  const auto spec = design_multisine(default_design(GridKind::odd_random));
  CHECK(spec.frequency_resolution_hz() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(spec.band.lo == 100);
  CHECK(spec.band.hi == 500);
  const auto rec = render_multisine(spec, 7);
  CHECK(rec.size() == 35000);
  CHECK(std::abs(rms(rec.samples) - 10.0) <= 0.01);
}

TEST_CASE("full grid excites every in-band bin") {
  const auto spec = design_multisine(default_design(GridKind::full));
  REQUIRE(spec.excited_bins.size() == 401);
  for (int i = 0; i < 401; ++i) CHECK(spec.excited_bins[static_cast<std::size_t>(i)] == 100 + i);
}

TEST_CASE("odd grid excites only odd bins") {
  const auto spec = design_multisine(default_design(GridKind::odd));
  CHECK(spec.excited_bins.size() == 200);
  for (int k : spec.excited_bins) CHECK(k % 2 == 1);
}

TEST_CASE("odd random grid drops exactly one line per group") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto spec = design_multisine(default_design(GridKind::odd_random, seed));
    std::vector<int> candidates;
    for (int k = 101; k <= 499; k += 2) candidates.push_back(k);
    REQUIRE(candidates.size() == 200);
    std::size_t total = 0;
    for (std::size_t start = 0; start < candidates.size(); start += 3) {
      const std::size_t len = std::min<std::size_t>(3, candidates.size() - start);
      std::size_t excited = 0;
      for (std::size_t i = start; i < start + len; ++i) excited += spec.is_excited(candidates[i]) ? 1 : 0;
      CHECK(excited == len - 1);
      total += excited;
    }
    CHECK(total == spec.excited_bins.size());
    for (int k : spec.excited_bins) CHECK(k % 2 == 1);
  }
}

TEST_CASE("band too narrow for the grid is rejected") {
  MultisineDesign d = default_design(GridKind::odd);
  d.f_lo_hz = 1.0;
  d.f_hi_hz = 1.005;  // only bin 100, which is even
  CHECK_THROWS_WITH_AS(design_multisine(d), "band too narrow for grid", ConfigError);
}

TEST_CASE("rendered rms matches the target for every grid") {
  for (auto kind : {GridKind::full, GridKind::odd, GridKind::odd_random}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto d = default_design(kind, seed);
      d.rms_target = 3.5;
      const auto period = render_period(design_multisine(d));
      CHECK(std::abs(rms(period) - 3.5) <= 0.01);
    }
  }
}

TEST_CASE("single line renders a cosine") {
  MultisineSpec spec;
  spec.samples_per_period = 64;
  spec.sample_rate_hz = 1.0;
  spec.band = {5, 5};
  spec.excited_bins = {5};
  spec.amplitudes = {1.0};
  spec.phases = {0.0};
  spec.grid_kind = GridKind::full;
  const auto x = render_period(spec);
  for (int t = 0; t < 64; ++t) {
    CHECK(x[static_cast<std::size_t>(t)] == doctest::Approx(std::cos(2.0 * std::numbers::pi * 5 * t / 64)).epsilon(1e-12));
  }
}

TEST_CASE("unexcited bins are empty in the brute-force spectrum") {
  MultisineDesign d = default_design(GridKind::odd_random, 9);
  d.samples_per_period = 400;
  d.sample_rate_hz = 50.0;
  d.f_lo_hz = 1.0;
  d.f_hi_hz = 10.0;
  const auto spec = design_multisine(d);
  const auto period = render_period(spec);
  const auto X = oracle::brute_dft(period);
  double peak = 0.0;
  for (const auto& v : X) peak = std::max(peak, std::abs(v));
  for (int k = 0; k < 400; ++k) {
    const int mirrored = std::min(k, 400 - k);
    if (mirrored == 0 || !spec.is_excited(mirrored)) CHECK(std::abs(X[static_cast<std::size_t>(k)]) <= 1e-12 * peak);
  }
  for (std::size_t i = 0; i < spec.excited_bins.size(); ++i) {
    const auto k = static_cast<std::size_t>(spec.excited_bins[i]);
    CHECK(std::abs(X[k]) == doctest::Approx(0.5 * std::sqrt(400.0) * spec.amplitudes[i]).epsilon(1e-9));
  }
}

TEST_CASE("odd grids have no content on even bins") {
  MultisineDesign d = default_design(GridKind::odd, 4);
  d.samples_per_period = 500;
  d.f_hi_hz = 10.0;
  const auto X = oracle::brute_dft(render_period(design_multisine(d)));
  double peak = 0.0;
  for (const auto& v : X) peak = std::max(peak, std::abs(v));
  for (std::size_t k = 0; k < X.size(); k += 2) CHECK(std::abs(X[k]) <= 1e-12 * peak);
}

TEST_CASE("band power is a property of the amplitude spectrum") {
  const auto a = design_multisine(default_design(GridKind::full, 1));
  const auto b = design_multisine(default_design(GridKind::full, 2));
  const double pa = riemann_band_power(a, 150, 350);
  const double pb = riemann_band_power(b, 150, 350);
  CHECK(std::abs(pa - pb) <= pa / 5000.0);
  CHECK(riemann_band_power(a, 600, 900) == 0.0);
  CHECK(riemann_band_power(a, 1, 2499) == doctest::Approx(100.0).epsilon(0.005));
  CHECK_THROWS_AS(riemann_band_power(a, 300, 200), ConfigError);
}

TEST_CASE("phases are uniform") {
  std::vector<double> phases;
  for (std::uint64_t seed = 1; phases.size() < 1000; ++seed) {
    const auto spec = design_multisine(default_design(GridKind::odd_random, seed));
    phases.insert(phases.end(), spec.phases.begin(), spec.phases.end());
  }
  for (double p : phases) {
    CHECK(p >= 0.0);
    CHECK(p < 2.0 * std::numbers::pi);
  }
  CHECK(oracle::ks_uniform_pvalue(phases, 0.0, 2.0 * std::numbers::pi) > 0.01);
}

TEST_CASE("periods repeat bit for bit") {
  const auto spec = design_multisine(default_design(GridKind::odd_random, 7));
  const auto rec = render_multisine(spec, 4);
  for (int p = 1; p < 4; ++p) {
    CHECK(std::equal(rec.samples.begin(), rec.samples.begin() + 5000, rec.samples.begin() + 5000 * p));
  }
}

TEST_CASE("design is deterministic in the seed") {
  const auto a = design_multisine(default_design(GridKind::odd_random, 42));
  const auto b = design_multisine(default_design(GridKind::odd_random, 42));
  const auto c = design_multisine(default_design(GridKind::odd_random, 43));
  CHECK(a == b);
  CHECK(render_period(a) == render_period(b));
  CHECK_FALSE(a.phases == c.phases);
}

TEST_CASE("metadata validation") {
  OperatingPoint op;
  op.soc_pct = 120.0;
  CHECK_THROWS_AS(op.validate(), ConfigError);
  op.soc_pct = 40.0;
  op.rms_a = -1.0;
  CHECK_THROWS_AS(op.validate(), ConfigError);
  op.rms_a = 2.0;
  CHECK_NOTHROW(op.validate());

  SignalRecord r;
  r.samples.assign(99, 0.0);
  r.samples_per_period = 50;
  r.n_periods = 2;
  CHECK_THROWS_AS(r.validate(), ConfigError);
  r.samples.push_back(0.0);
  CHECK_NOTHROW(r.validate());

  CHECK(grid_kind_from_string(to_string(GridKind::odd_random)) == GridKind::odd_random);
  CHECK_THROWS_AS(grid_kind_from_string("triangle"), ConfigError);

  auto spec = design_multisine(default_design(GridKind::odd));
  spec.excited_bins[0] = 100;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}
