// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {

std::vector<cd> brute_dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t t = 0; t < n; ++t) {
      const long double arg = two_pi * static_cast<long double>((k * t) % n) / static_cast<long double>(n);
      re += x[t] * std::cos(arg);
      im -= x[t] * std::sin(arg);
    }
    const long double s = std::sqrt(static_cast<long double>(n));
    out[k] = cd(static_cast<double>(re / s), static_cast<double>(im / s));
  }
  return out;
}

Eigen::VectorXcd normal_equation_ls(const Eigen::MatrixXcd& K, const Eigen::VectorXcd& y) {
  const Eigen::MatrixXcd gram = K.adjoint() * K;
  return gram.llt().solve(K.adjoint() * y);
}

Eigen::MatrixXcd gram_inverse(const Eigen::MatrixXcd& K) {
  const Eigen::MatrixXcd gram = K.adjoint() * K;
  return gram.llt().solve(Eigen::MatrixXcd::Identity(gram.rows(), gram.cols()));
}

std::vector<double> difference_equation(std::span<const double> b, std::span<const double> a,
                                        std::span<const double> u) {
  std::vector<double> y(u.size(), 0.0);
  for (std::size_t t = 0; t < u.size(); ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < b.size() && i <= t; ++i) acc += b[i] * u[t - i];
    for (std::size_t i = 1; i < a.size() && i <= t; ++i) acc -= a[i] * y[t - i];
    y[t] = acc / a[0];
  }
  return y;
}

cd rational_at(std::span<const double> b, std::span<const double> a, double w) {
  cd num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) num += b[i] * std::polar(1.0, -w * static_cast<double>(i));
  for (std::size_t i = 0; i < a.size(); ++i) den += a[i] * std::polar(1.0, -w * static_cast<double>(i));
  return num / den;
}

double ks_uniform_pvalue(std::vector<double> samples, double lo, double hi) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = (samples[i] - lo) / (hi - lo);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int j = 1; j <= 100; ++j) {
    p += 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("blalab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
