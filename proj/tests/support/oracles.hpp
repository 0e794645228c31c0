// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference implementations used by the tests. They are deliberately naive
// and share no code with the library.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;

/// O(N^2) DFT with 1/sqrt(N) scaling, accumulated in long double.
std::vector<cd> brute_dft(std::span<const double> x);

/// Solves min |K theta - y| through the normal equations K^H K theta = K^H y.
Eigen::VectorXcd normal_equation_ls(const Eigen::MatrixXcd& K, const Eigen::VectorXcd& y);

/// (K^H K)^{-1} via an explicit LLT inverse.
Eigen::MatrixXcd gram_inverse(const Eigen::MatrixXcd& K);

/// Direct-form I difference equation from rest:
/// sum a_i y(t-i) = sum b_i u(t-i).
std::vector<double> difference_equation(std::span<const double> b, std::span<const double> a,
                                        std::span<const double> u);

/// B(e^{-j w}) / A(e^{-j w}) by explicit powers.
cd rational_at(std::span<const double> b, std::span<const double> a, double w);

/// Kolmogorov-Smirnov test of uniformity on [lo, hi); returns the asymptotic p-value.
double ks_uniform_pvalue(std::vector<double> samples, double lo, double hi);

double mean(std::span<const double> v);
double variance(std::span<const double> v);

/// Fresh scratch directory below the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace oracle
