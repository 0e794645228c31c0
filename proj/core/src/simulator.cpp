// SPDX-License-Identifier: Apache-2.0
#include "blalab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "blalab/errors.hpp"

namespace blalab {
namespace {

std::vector<double> padded(const std::vector<double>& c, std::size_t size) {
  std::vector<double> out(c);
  out.resize(size, 0.0);
  return out;
}

double uniform_phase(std::mt19937_64& rng) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * std::numbers::pi * unit;
}

}  // namespace

int WienerSurrogate::state_size() const { return std::max(linear.na(), linear.nb()); }

void WienerSurrogate::validate() const {
  linear.validate();
  if (!(noise_std >= 0.0)) throw ConfigError("surrogate: noise_std must be non-negative");
  if (noise_pole && !(std::abs(*noise_pole) < 1.0)) throw ConfigError("surrogate: noise pole must lie inside (-1, 1)");
  if (!std::isfinite(alpha2) || !std::isfinite(alpha3)) throw ConfigError("surrogate: nonlinear coefficients must be finite");
  if (!initial_state.empty() && static_cast<int>(initial_state.size()) != state_size()) {
    throw ConfigError("surrogate: initial_state has length " + std::to_string(initial_state.size()) + ", expected " +
                      std::to_string(state_size()));
  }
  for (const auto& p : linear.poles()) {
    if (!(std::abs(p) < 1.0)) throw ConfigError("surrogate: linear block is not strictly stable");
  }
  op_point.validate();
}

WienerSurrogate WienerSurrogate::default_surrogate() {
  // Poles 0.6 and 0.8 exp(+-j 2 pi 3/50); zeros -0.2, -0.7, 0.5.
  const double w = 2.0 * std::numbers::pi * 3.0 / 50.0;
  const double r = 0.8;
  const std::vector<double> quad{1.0, -2.0 * r * std::cos(w), r * r};
  std::vector<double> a{1.0, quad[1] - 0.6, quad[2] - 0.6 * quad[1], -0.6 * quad[2]};
  std::vector<double> b{1.0};
  for (double z : {-0.2, -0.7, 0.5}) {
    std::vector<double> next(b.size() + 1, 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) {
      next[i] += b[i];
      next[i + 1] -= z * b[i];
    }
    b = next;
  }
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (double v : a) sum_a += v;
  for (double v : b) sum_b += v;
  const double scale = 0.05 * sum_a / sum_b;
  for (double& v : b) v *= scale;

  WienerSurrogate sys;
  sys.linear.b = b;
  sys.linear.a = a;
  sys.initial_state.assign(static_cast<std::size_t>(sys.state_size()), 0.0);
  return sys;
}

WienerSurrogate at_operating_point(WienerSurrogate base, const OperatingPoint& op, const SurrogateHook& hook) {
  base.op_point = op;
  if (hook) hook(base, op);
  base.validate();
  return base;
}

std::vector<double> filter(const RationalModel& model, std::span<const double> input, std::vector<double>& state) {
  if (model.a.empty() || model.a.front() != 1.0) throw ConfigError("filter: a[0] must equal 1");
  const auto order = static_cast<std::size_t>(std::max(model.na(), model.nb()));
  if (state.empty()) state.assign(order, 0.0);
  if (state.size() != order) throw ConfigError("filter: state length does not match the model order");
  const auto b = padded(model.b, order + 1);
  const auto a = padded(model.a, order + 1);
  std::vector<double> out(input.size());
  for (std::size_t t = 0; t < input.size(); ++t) {
    const double x = input[t];
    const double y = b[0] * x + (order > 0 ? state[0] : 0.0);
    for (std::size_t i = 0; i + 1 < order; ++i) state[i] = b[i + 1] * x - a[i + 1] * y + state[i + 1];
    if (order > 0) state[order - 1] = b[order] * x - a[order] * y;
    out[t] = y;
  }
  return out;
}

SignalRecord simulate(const WienerSurrogate& system, const SignalRecord& u, std::uint64_t seed) {
  system.validate();
  std::vector<double> state = system.initial_state;
  auto z = filter(system.linear, u.samples, state);
  SignalRecord y = u;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double colored = 0.0;
  for (std::size_t t = 0; t < z.size(); ++t) {
    const double zt = z[t];
    double v = 0.0;
    if (system.noise_std > 0.0) {
      const double e = system.noise_std * normal(rng);
      colored = system.noise_pole ? *system.noise_pole * colored + e : e;
      v = colored;
    }
    y.samples[t] = zt + system.alpha2 * zt * zt + system.alpha3 * zt * zt * zt + v;
  }
  return y;
}

double linear_output_variance(const WienerSurrogate& system, const MultisineSpec& spec) {
  double total = 0.0;
  for (std::size_t i = 0; i < spec.excited_bins.size(); ++i) {
    const double theta = 2.0 * std::numbers::pi * spec.excited_bins[i] / spec.samples_per_period;
    const double gain = std::abs(system.linear.response(theta));
    total += gain * gain * spec.amplitudes[i] * spec.amplitudes[i] / 2.0;
  }
  return total;
}

double bussgang_factor(const WienerSurrogate& system, const MultisineSpec& spec) {
  return 1.0 + 3.0 * system.alpha3 * linear_output_variance(system, spec);
}

ComplexVector true_bla(const WienerSurrogate& system, const MultisineSpec& spec) {
  const double factor = bussgang_factor(system, spec);
  ComplexVector out = system.linear.response_at_bins(spec.excited_bins, spec.samples_per_period);
  for (auto& g : out) g *= factor;
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t x = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::vector<CampaignMember> make_campaign(std::span<const WienerSurrogate> family, const MultisineSpec& spec,
                                          int n_periods, std::span<const int> record_lengths, std::uint64_t seed,
                                          const CampaignOptions& options) {
  if (family.empty()) throw ConfigError("campaign: empty surrogate family");
  if (!record_lengths.empty() && record_lengths.size() != family.size()) {
    throw ConfigError("campaign: record_lengths must be empty or match the family size");
  }
  if (record_lengths.empty() && n_periods < 1) throw ConfigError("campaign: n_periods must be positive");
  if (!(options.initial_state_std >= 0.0)) throw ConfigError("campaign: initial_state_std must be non-negative");
  spec.validate();

  const int period = spec.samples_per_period;
  std::vector<CampaignMember> members;
  members.reserve(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    CampaignMember m;
    m.seed = derive_seed(seed, i);
    m.system = family[i];
    m.spec = spec;
    if (options.redraw_phases) {
      std::mt19937_64 phase_rng(derive_seed(m.seed, 2));
      for (double& phi : m.spec.phases) phi = uniform_phase(phase_rng);
    }
    if (options.initial_state_std > 0.0) {
      std::mt19937_64 state_rng(derive_seed(m.seed, 0));
      std::normal_distribution<double> normal(0.0, options.initial_state_std);
      m.system.initial_state.assign(static_cast<std::size_t>(m.system.state_size()), 0.0);
      for (double& s : m.system.initial_state) s = normal(state_rng);
    }

    const int length = record_lengths.empty() ? n_periods * period : record_lengths[i];
    if (length < 1) throw ConfigError("campaign: record lengths must be positive");
    const int periods_needed = (length + period - 1) / period;
    m.input = render_multisine(m.spec, periods_needed, m.system.op_point);
    if (length % period != 0) {
      m.input.samples.resize(static_cast<std::size_t>(length));
      m.input.samples_per_period = length;
      m.input.n_periods = 1;
    }
    m.output = simulate(m.system, m.input, derive_seed(m.seed, 1));
    members.push_back(std::move(m));
  }
  return members;
}

}  // namespace blalab
