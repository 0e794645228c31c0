// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "blalab/parametric_fit.hpp"

namespace blalab {

/// Wiener-type stand-in for a battery: z = L(q) u, y = z + a2 z^2 + a3 z^3 + v.
struct WienerSurrogate {
  RationalModel linear;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double noise_std = 0.0;
  /// AR(1) pole of the optional noise colouring filter; white when empty.
  std::optional<double> noise_pole;
  /// Direct-form II transposed filter state at t = 0, length max(na, nb).
  std::vector<double> initial_state;
  OperatingPoint op_point;

  int state_size() const;
  void validate() const;

  /// Third-order low-pass with a mild resonance near 3 Hz at fs = 50 Hz and a
  /// DC gain of 0.05.
  static WienerSurrogate default_surrogate();
};

/// Re-parametrises a surrogate for an operating point.
using SurrogateHook = std::function<void(WienerSurrogate&, const OperatingPoint&)>;

WienerSurrogate at_operating_point(WienerSurrogate base, const OperatingPoint& op, const SurrogateHook& hook);

/// Linear filtering through `model` from `state`; `state` is updated in place.
std::vector<double> filter(const RationalModel& model, std::span<const double> input, std::vector<double>& state);

/// Output record for input `u`. Deterministic given `seed`.
SignalRecord simulate(const WienerSurrogate& system, const SignalRecord& u, std::uint64_t seed);

/// Steady-state variance of z for the multisine: sum |L|^2 A^2 / 2.
double linear_output_variance(const WienerSurrogate& system, const MultisineSpec& spec);

double bussgang_factor(const WienerSurrogate& system, const MultisineSpec& spec);

/// (1 + 3 a3 sigma_z^2) L(omega_k) on the spec's excited bins.
ComplexVector true_bla(const WienerSurrogate& system, const MultisineSpec& spec);

/// Derives an independent 64-bit seed for stream `index`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct CampaignOptions {
  /// Standard deviation of each member's random initial filter state.
  double initial_state_std = 1.0;
  /// Draw a fresh phase realisation per member instead of reusing `spec`.
  bool redraw_phases = false;
};

struct CampaignMember {
  SignalRecord input;
  SignalRecord output;
  WienerSurrogate system;
  MultisineSpec spec;
  std::uint64_t seed = 0;
};

/// One record per surrogate. `record_lengths` is either empty (n_periods full
/// periods each) or one length in samples per member.
std::vector<CampaignMember> make_campaign(std::span<const WienerSurrogate> family, const MultisineSpec& spec,
                                          int n_periods, std::span<const int> record_lengths, std::uint64_t seed,
                                          const CampaignOptions& options = {});

}  // namespace blalab
