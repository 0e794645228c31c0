// SPDX-License-Identifier: Apache-2.0
#include "blalab/bla_aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blalab/errors.hpp"

namespace blalab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-9 * std::max(1.0, std::abs(a[i]))) return false;
  }
  return true;
}

double db(double magnitude) { return 20.0 * std::log10(magnitude); }

}  // namespace

CommonBla average_blas(std::span<const FrfEstimate> estimates) {
  if (estimates.empty()) throw ConfigError("average: no estimates");
  const auto& ref = estimates.front();
  ref.validate();
  for (const auto& e : estimates) {
    e.validate();
    if (e.bins != ref.bins || e.n_lines != ref.n_lines || e.sample_rate_hz != ref.sample_rate_hz) {
      throw ConfigError("average: estimates are on different bin grids");
    }
  }
  const auto m = estimates.size();
  const auto n = ref.size();
  CommonBla out;
  out.bins = ref.bins;
  out.m_experiments = static_cast<int>(m);
  out.sample_rate_hz = ref.sample_rate_hz;
  out.n_lines = ref.n_lines;
  out.c_bla.assign(n, Complex{0.0, 0.0});
  for (const auto& e : estimates) {
    for (std::size_t i = 0; i < n; ++i) out.c_bla[i] += e.g_bla[i];
    out.member_meta.insert(out.member_meta.end(), e.members.begin(), e.members.end());
  }
  for (auto& c : out.c_bla) c /= static_cast<double>(m);

  out.sample_var.assign(n, kNaN);
  if (m >= 2) {
    std::fill(out.sample_var.begin(), out.sample_var.end(), 0.0);
    for (const auto& e : estimates) {
      for (std::size_t i = 0; i < n; ++i) out.sample_var[i] += std::norm(e.g_bla[i] - out.c_bla[i]);
    }
    for (auto& v : out.sample_var) v /= static_cast<double>(m - 1);
  }
  return out;
}

BlaView view_of(const FrfEstimate& estimate) {
  BlaView v;
  v.bins = estimate.bins;
  v.values = estimate.g_bla;
  v.variance = estimate.g_var;
  v.freq_hz.reserve(estimate.size());
  for (std::size_t i = 0; i < estimate.size(); ++i) v.freq_hz.push_back(estimate.freq_hz(i));
  return v;
}

BlaView view_of(const CommonBla& common) {
  BlaView v;
  v.bins = common.bins;
  v.values = common.c_bla;
  v.variance.reserve(common.size());
  for (std::size_t i = 0; i < common.size(); ++i) {
    v.freq_hz.push_back(common.freq_hz(i));
    v.variance.push_back(common.has_variance() ? common.sample_var[i] / common.m_experiments : kNaN);
  }
  return v;
}

BlaComparison compare_blas(const BlaView& a, const BlaView& b) {
  if (!same_grid(a.freq_hz, b.freq_hz)) throw ConfigError("compare: estimates are on different frequency grids");
  const auto n = a.values.size();
  BlaComparison out;
  out.bins = a.bins;
  out.freq_hz = a.freq_hz;
  double var_a = 0.0;
  double var_b = 0.0;
  std::size_t var_count = 0;
  std::size_t b_ge_a = 0;
  std::size_t pooled_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex d = a.values[i] - b.values[i];
    out.difference.push_back(d);
    const double gap = std::abs(db(std::abs(a.values[i])) - db(std::abs(b.values[i])));
    out.gap_db.push_back(gap);
    out.max_gap_db = std::max(out.max_gap_db, gap);
    out.mean_gap_db += gap;
    out.mean_abs_difference += std::abs(d);
    const double va = i < a.variance.size() ? a.variance[i] : kNaN;
    const double vb = i < b.variance.size() ? b.variance[i] : kNaN;
    if (std::isfinite(va) && std::isfinite(vb)) {
      out.pooled_std.push_back(std::sqrt(va + vb));
      out.mean_pooled_std += out.pooled_std.back();
      ++pooled_count;
      var_a += va;
      var_b += vb;
      ++var_count;
      if (vb >= va) ++b_ge_a;
    } else {
      out.pooled_std.push_back(kNaN);
    }
  }
  if (n > 0) {
    out.mean_gap_db /= static_cast<double>(n);
    out.mean_abs_difference /= static_cast<double>(n);
  }
  out.mean_pooled_std = pooled_count > 0 ? out.mean_pooled_std / static_cast<double>(pooled_count) : kNaN;
  out.variance_ratio = var_count > 0 && var_a > 0.0 ? var_b / var_a : kNaN;
  out.fraction_b_var_ge_a = var_count > 0 ? static_cast<double>(b_ge_a) / static_cast<double>(var_count) : kNaN;
  return out;
}

}  // namespace blalab
