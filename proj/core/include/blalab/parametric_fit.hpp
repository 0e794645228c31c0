// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blalab/bla_aggregate.hpp"
#include "blalab/errors.hpp"

namespace blalab {

/// Discrete-time transfer function B(z^-1) / A(z^-1) with a[0] == 1.
struct RationalModel {
  std::vector<double> b{1.0};
  std::vector<double> a{1.0};
  double cost = 0.0;
  double mdl = 0.0;
  int n_freqs_used = 0;

  int nb() const { return static_cast<int>(b.size()) - 1; }
  int na() const { return static_cast<int>(a.size()) - 1; }
  int n_params() const { return nb() + na() + 1; }

  /// B/A at z^-1 = exp(-j theta), theta in rad/sample.
  Complex response(double theta) const;
  /// Response on DFT bins of an N-point grid.
  ComplexVector response_at_bins(std::span<const int> bins, int n_lines) const;

  std::vector<Complex> poles() const;
  std::vector<Complex> zeros() const;
  void validate() const;
};

/// Frequencies (rad/sample), measured FRF, and its variance.
struct FitData {
  std::vector<double> theta;
  ComplexVector g;
  std::vector<double> variance;
  std::vector<int> bins;
  double sample_rate_hz = 50.0;
  int n_lines = 0;

  std::size_t size() const { return g.size(); }
};

FitData fit_data_from(const FrfEstimate& estimate);
FitData fit_data_from(const CommonBla& common);

enum class Weighting { variance, uniform };

struct FitOptions {
  Weighting weighting = Weighting::variance;
  int sk_iterations = 10;
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
};

/// Thrown when the weighted cost cannot be driven down; carries the best
/// model seen.
class FitDivergedError : public NumericalError {
 public:
  FitDivergedError(const std::string& what, RationalModel best) : NumericalError(what), best_(std::move(best)) {}
  const RationalModel& best() const { return best_; }

 private:
  RationalModel best_;
};

/// MDL(theta) = V(theta) (1 + dim ln(F) / F).
double mdl_criterion(double cost, int n_params, int n_freqs);

/// Minimises V = (1/F) sum |G - B/A|^2 / sigma^2 over real coefficients,
/// starting from Sanathanan-Koerner iterations and refining with
/// Levenberg-Marquardt. `initial` overrides the linear prefit.
RationalModel fit_tf(const FitData& data, int nb, int na, const FitOptions& options = {},
                     const std::optional<RationalModel>& initial = std::nullopt);

struct OrderRow {
  int nb = 0;
  int na = 0;
  double cost = 0.0;
  double mdl = 0.0;
  bool ok = false;
  std::string message;
};

struct OrderSelection {
  RationalModel best;
  std::vector<OrderRow> table;
};

/// Fits every (nb, na) on the grid and keeps the MDL minimiser, preferring
/// fewer parameters on ties. Each fit is also warm-started from the best
/// nested lower-order model so costs never increase along a nested grid.
OrderSelection select_order(const FitData& data, std::span<const std::pair<int, int>> grid,
                            const FitOptions& options = {});

}  // namespace blalab
