// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <span>
#include <vector>

namespace blalab::detail {

/// Unnormalised complex DFT of length in.size(); sign -1 forward, +1 backward.
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> in, int sign);

/// Unnormalised forward DFT of real data, full N-point spectrum.
std::vector<std::complex<double>> fft_real(std::span<const double> in);

}  // namespace blalab::detail
