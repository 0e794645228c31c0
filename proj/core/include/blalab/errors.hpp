// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace blalab {

/// Invalid input or configuration: violated preconditions, malformed files,
/// mismatched grids. The CLI maps these to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that could not produce a trustworthy result (rank-deficient
/// local regressor, diverging fit). The CLI maps these to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::optional<int> bin = std::nullopt)
      : std::runtime_error(bin ? what + " (bin " + std::to_string(*bin) + ")" : what), bin_(bin) {}

  std::optional<int> bin() const { return bin_; }

 private:
  std::optional<int> bin_;
};

}  // namespace blalab
