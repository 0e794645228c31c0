// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "blalab/errors.hpp"
#include "blalab/parametric_fit.hpp"
#include "blalab/simulator.hpp"
#include "oracles.hpp"

using namespace blalab;

namespace {

constexpr double kPi = std::numbers::pi;

FitData exact_data(const RationalModel& m, int lo = 100, int hi = 500, int n = 5000) {
  FitData d;
  d.n_lines = n;
  for (int k = lo; k <= hi; ++k) {
    const double th = 2.0 * kPi * k / n;
    d.bins.push_back(k);
    d.theta.push_back(th);
    d.g.push_back(oracle::rational_at(m.b, m.a, th));
    d.variance.push_back(1.0);
  }
  return d;
}

FitData noisy_data(const RationalModel& m, double sigma, std::uint64_t seed) {
  auto d = exact_data(m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma / std::sqrt(2.0));
  for (auto& g : d.g) g += Complex(n(rng), n(rng));
  std::fill(d.variance.begin(), d.variance.end(), sigma * sigma);
  return d;
}

std::vector<std::pair<int, int>> diagonal(int lo, int hi) {
  std::vector<std::pair<int, int>> g;
  for (int i = lo; i <= hi; ++i) g.emplace_back(i, i);
  return g;
}

FitOptions uniform() {
  FitOptions o;
  o.weighting = Weighting::uniform;
  return o;
}

}  // namespace

TEST_CASE("exact third-order data is recovered") {
  const auto truth = WienerSurrogate::default_surrogate().linear;
  const auto fit = fit_tf(exact_data(truth), 3, 3, uniform());
  for (std::size_t i = 0; i < truth.b.size(); ++i) CHECK(std::abs(fit.b[i] - truth.b[i]) <= 1e-6 * std::abs(truth.b[i]) + 1e-12);
  for (std::size_t i = 0; i < truth.a.size(); ++i) CHECK(std::abs(fit.a[i] - truth.a[i]) <= 1e-6 * std::abs(truth.a[i]) + 1e-12);
  CHECK(fit.a[0] == 1.0);
  CHECK(fit.n_freqs_used == 401);
}

TEST_CASE("a static gain fits with zero orders") {
  RationalModel gain;
  gain.b = {0.37};
  const auto fit = fit_tf(exact_data(gain), 0, 0, uniform());
  CHECK(fit.b[0] == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(fit.cost < 1e-20);
}

TEST_CASE("FIR fits match the normal-equation oracle") {
  RationalModel truth;
  truth.b = {0.5, -0.2, 0.1};
  auto data = noisy_data(truth, 0.05, 3);
  const auto fit = fit_tf(data, 3, 0, uniform());
  // Real parameters: stack real and imaginary parts.
  const auto f = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXcd K(2 * f, 4);
  Eigen::VectorXcd y(2 * f);
  for (Eigen::Index k = 0; k < f; ++k) {
    for (int i = 0; i < 4; ++i) {
      const Complex z = std::polar(1.0, -data.theta[static_cast<std::size_t>(k)] * i);
      K(2 * k, i) = z.real();
      K(2 * k + 1, i) = z.imag();
    }
    y(2 * k) = data.g[static_cast<std::size_t>(k)].real();
    y(2 * k + 1) = data.g[static_cast<std::size_t>(k)].imag();
  }
  const auto ref = oracle::normal_equation_ls(K, y);
  for (int i = 0; i < 4; ++i) CHECK(fit.b[static_cast<std::size_t>(i)] == doctest::Approx(ref(i).real()).epsilon(1e-8));
}

TEST_CASE("scaling the variances scales the cost only") {
  const auto truth = WienerSurrogate::default_surrogate().linear;
  auto data = noisy_data(truth, 1e-3, 4);
  const auto a = fit_tf(data, 3, 3);
  for (double& v : data.variance) v *= 0.5;
  const auto b = fit_tf(data, 3, 3);
  for (std::size_t i = 0; i < a.b.size(); ++i) CHECK(b.b[i] == doctest::Approx(a.b[i]).epsilon(1e-8));
  for (std::size_t i = 0; i < a.a.size(); ++i) CHECK(b.a[i] == doctest::Approx(a.a[i]).epsilon(1e-8));
  CHECK(b.cost == doctest::Approx(2.0 * a.cost).epsilon(1e-8));
}

TEST_CASE("residuals are white at the true order") {
  const auto truth = WienerSurrogate::default_surrogate().linear;
  const auto fit = fit_tf(noisy_data(truth, 3e-4, 5), 3, 3);
  CHECK(fit.cost >= 0.5);
  CHECK(fit.cost <= 2.0);
  CHECK(fit.mdl == doctest::Approx(mdl_criterion(fit.cost, 7, 401)));
}

TEST_CASE("order selection finds the true order") {
  const auto truth = WienerSurrogate::default_surrogate().linear;
  const auto grid = diagonal(1, 5);
  const auto sel = select_order(noisy_data(truth, 3e-4, 6), grid);
  CHECK(sel.best.nb() == 3);
  CHECK(sel.best.na() == 3);
  REQUIRE(sel.table.size() == 5);
  for (std::size_t i = 1; i < sel.table.size(); ++i) {
    REQUIRE(sel.table[i].ok);
    CHECK(sel.table[i].cost <= sel.table[i - 1].cost * (1.0 + 1e-9));
  }
}

TEST_CASE("noiseless first-order data selects order one") {
  RationalModel truth;
  truth.b = {0.1};
  truth.a = {1.0, -0.9};
  const auto grid = diagonal(1, 4);
  const auto sel = select_order(exact_data(truth), grid, uniform());
  CHECK(sel.best.n_params() == 3);
  CHECK(sel.best.a[1] == doctest::Approx(-0.9).epsilon(1e-8));
}

TEST_CASE("a singleton grid returns that order") {
  const auto truth = WienerSurrogate::default_surrogate().linear;
  const std::vector<std::pair<int, int>> grid{{2, 1}};
  const auto sel = select_order(noisy_data(truth, 1e-3, 7), grid);
  CHECK(sel.best.nb() == 2);
  CHECK(sel.best.na() == 1);
}

TEST_CASE("poles and zeros come in conjugate pairs") {
  const auto truth = WienerSurrogate::default_surrogate().linear;
  const auto fit = fit_tf(noisy_data(truth, 1e-3, 8), 3, 3);
  for (const auto& roots : {fit.poles(), fit.zeros()}) {
    CHECK(roots.size() == 3);
    for (const auto& r : roots) {
      const bool has_conj = std::any_of(roots.begin(), roots.end(), [&](const Complex& s) {
        return std::abs(s - std::conj(r)) < 1e-9 * std::max(1.0, std::abs(r));
      });
      CHECK(has_conj);
    }
  }
  const auto poles = truth.poles();
  std::vector<double> radii;
  for (const auto& p : poles) radii.push_back(std::abs(p));
  std::sort(radii.begin(), radii.end());
  CHECK(radii[0] == doctest::Approx(0.6));
  CHECK(radii[2] == doctest::Approx(0.8));
}

TEST_CASE("response evaluation matches the direct formula") {
  RationalModel m;
  m.b = {0.2, -0.1, 0.05};
  m.a = {1.0, -1.1, 0.3};
  for (double th : {0.0, 0.1, 1.0, 3.0}) CHECK(std::abs(m.response(th) - oracle::rational_at(m.b, m.a, th)) < 1e-14);
  const std::vector<int> bins{1, 2, 3};
  const auto r = m.response_at_bins(bins, 100);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(r[i] - m.response(2.0 * kPi * bins[i] / 100)) < 1e-15);
}

TEST_CASE("fit preconditions") {
  RationalModel m;
  auto tiny = exact_data(m, 100, 104);
  CHECK_THROWS_AS(fit_tf(tiny, 3, 3), ConfigError);
  auto data = exact_data(m);
  data.variance[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_tf(data, 1, 1), ConfigError);
  CHECK_NOTHROW(fit_tf(data, 1, 1, uniform()));
  CHECK_THROWS_AS(select_order(data, std::span<const std::pair<int, int>>{}), ConfigError);
  RationalModel bad;
  bad.a = {2.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("a fit that cannot move reports divergence with its best model") {
  RationalModel truth;
  truth.b = {0.7};
  FitOptions o = uniform();
  o.max_iterations = 0;
  RationalModel start;
  start.b = {0.0};
  try {
    fit_tf(exact_data(truth), 0, 0, o, start);
    FAIL("expected FitDivergedError");
  } catch (const FitDivergedError& e) {
    CHECK(std::isfinite(e.best().cost));
    CHECK(e.best().b.size() == 1);
  }
}

TEST_CASE("MDL penalty") {
  CHECK(mdl_criterion(2.0, 7, 401) == doctest::Approx(2.0 * (1.0 + 7.0 * std::log(401.0) / 401.0)));
  CHECK(mdl_criterion(0.0, 3, 10) == 0.0);
}

TEST_CASE("fit data from estimates") {
  FrfEstimate e;
  e.bins = {100, 200};
  e.g_bla = {Complex(1.0, 0.0), Complex(0.5, 0.5)};
  e.g_var = {0.1, 0.2};
  e.n_lines = 5000;
  const auto d = fit_data_from(e);
  CHECK(d.theta[0] == doctest::Approx(2.0 * kPi * 100 / 5000));
  CHECK(d.variance == e.g_var);

  CommonBla c;
  c.bins = {100};
  c.c_bla = {Complex(1.0, 0.0)};
  c.sample_var = {0.3};
  c.m_experiments = 3;
  c.n_lines = 5000;
  CHECK(fit_data_from(c).variance[0] == doctest::Approx(0.1));
  c.m_experiments = 1;
  CHECK(std::isnan(fit_data_from(c).variance[0]));
}
