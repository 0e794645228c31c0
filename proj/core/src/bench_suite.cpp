// SPDX-License-Identifier: Apache-2.0
#include "blalab/bench_suite.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

#include "blalab/bla_aggregate.hpp"
#include "blalab/concat_lpm.hpp"
#include "blalab/distortion.hpp"
#include "blalab/errors.hpp"
#include "blalab/io.hpp"
#include "blalab/lpm.hpp"
#include "blalab/parametric_fit.hpp"
#include "blalab/simulator.hpp"

namespace blalab::bench {
namespace detail {
extern const std::string_view kThresholdsJson;
}  // namespace detail

namespace {
namespace fs = std::filesystem;
using nlohmann::json;
using Metrics = std::map<std::string, double>;

struct Context {
  std::optional<fs::path> artifacts;
  json config = json::object();

  std::optional<fs::path> dir(const std::string& id) const {
    if (!artifacts) return std::nullopt;
    auto d = *artifacts / id;
    fs::create_directories(d);
    return d;
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

MultisineSpec full_grid(int n_lines, std::uint64_t seed) {
  MultisineDesign d;
  d.samples_per_period = n_lines;
  d.grid_kind = GridKind::full;
  d.seed = seed;
  return design_multisine(d);
}

double max_relative_error(const ComplexVector& estimate, const ComplexVector& truth) {
  double worst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) worst = std::max(worst, std::abs(estimate[i] - truth[i]) / std::abs(truth[i]));
  return worst;
}

WienerSurrogate surrogate_with(double alpha2, double alpha3, double noise_std, std::vector<double> state = {}) {
  auto sys = WienerSurrogate::default_surrogate();
  sys.alpha2 = alpha2;
  sys.alpha3 = alpha3;
  sys.noise_std = noise_std;
  if (!state.empty()) sys.initial_state = std::move(state);
  return sys;
}

// Noiseless single-period record with a deliberate initial state.
struct LeakageRun {
  FrfEstimate estimate;
  ComplexVector truth;
  double lpm_err = 0.0;
  double raw_err = 0.0;
};

LeakageRun leakage_run(int n_lines, std::uint64_t seed) {
  const auto sys = surrogate_with(0.0, 0.0, 0.0, {5.0, -3.0, 2.0});
  const auto spec = full_grid(n_lines, seed);
  const auto u = render_multisine(spec, 1);
  const auto y = simulate(sys, u, 0);
  const auto U = dft(u);
  const auto Y = dft(y);
  LpmConfig cfg;
  cfg.poly_order = 2;
  cfg.half_window = 3;
  cfg.band = spec.band;
  LeakageRun run;
  run.estimate = estimate_frf(U, Y, cfg);
  run.truth = sys.linear.response_at_bins(run.estimate.bins, n_lines);
  run.lpm_err = max_relative_error(run.estimate.g_bla, run.truth);
  ComplexVector raw;
  for (int k : run.estimate.bins) raw.push_back(Y[k] / U[k]);
  run.raw_err = max_relative_error(raw, run.truth);
  return run;
}

Metrics design_arithmetic(Context& ctx) {
  Stopwatch clock;
  const MultisineDesign design;
  const auto spec = design_multisine(design);
  const auto record = render_multisine(spec, 7);
  double power = 0.0;
  for (double v : record.samples) power += v * v;
  const double rms = std::sqrt(power / static_cast<double>(record.size()));
  Metrics m{{"resolution_hz", spec.frequency_resolution_hz()},
            {"band_lo_bin", spec.band.lo},
            {"band_hi_bin", spec.band.hi},
            {"n_excited", static_cast<double>(spec.excited_bins.size())},
            {"n_samples", static_cast<double>(record.size())},
            {"rms", rms},
            {"rms_abs_error", std::abs(rms - design.rms_target)}};
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"f_lo_hz", design.f_lo_hz}, {"f_hi_hz", design.f_hi_hz}, {"fs", design.sample_rate_hz},
                {"N", design.samples_per_period}, {"periods", 7}, {"grid", to_string(design.grid_kind)}};
  if (auto d = ctx.dir("design_arithmetic")) io::write_spec(*d / "spec.json", spec);
  return m;
}

Metrics lpm_accuracy(Context& ctx) {
  Stopwatch clock;
  const auto run = leakage_run(5000, 101);
  Metrics m{{"max_rel_err", run.lpm_err},
            {"raw_max_rel_err", run.raw_err},
            {"improvement_vs_raw", run.raw_err / run.lpm_err}};
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"N", 5000}, {"R", 2}, {"n", 3}, {"grid", "full"}, {"initial_state", {5.0, -3.0, 2.0}}, {"seed", 101}};
  if (auto d = ctx.dir("lpm_accuracy")) io::write_frf(*d / "frf.csv", run.estimate);
  return m;
}

Metrics leakage_ladder(Context& ctx) {
  Stopwatch clock;
  const std::vector<int> lengths{2500, 5000, 10000, 20000, 40000};
  Metrics m;
  std::vector<double> errors;
  std::ostringstream table;
  table << "n_lines,max_rel_err\n";
  for (int n : lengths) {
    const auto run = leakage_run(n, 102);
    errors.push_back(run.lpm_err);
    m["err_N" + std::to_string(n)] = run.lpm_err;
    table << n << ',' << io::format_double(run.lpm_err) << '\n';
  }
  int violations = 0;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(errors[i] < errors[i - 1])) ++violations;
  }
  m["non_decreasing_steps"] = violations;
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"lengths", lengths}, {"R", 2}, {"n", 3}, {"seed", 102}};
  if (auto d = ctx.dir("leakage_ladder")) io::write_text(*d / "ladder.csv", table.str());
  return m;
}

Metrics variance_calibration(Context& ctx) {
  Stopwatch clock;
  constexpr int kRuns = 500;
  constexpr double kNoise = 0.01;
  constexpr std::uint64_t kSeed = 103;
  const auto sys = surrogate_with(0.0, 0.0, kNoise, {1.0, -1.0, 0.5});
  const auto spec = full_grid(5000, kSeed);
  const auto u = render_multisine(spec, 1);
  const auto U = dft(u);
  LpmConfig cfg;
  cfg.half_window = 4;
  cfg.band = spec.band;
  cfg.estimate_noise_var = true;

  const auto bins = static_cast<std::size_t>(spec.band.count());
  ComplexVector sum(bins);
  std::vector<double> sum_sq(bins, 0.0);
  std::vector<double> sum_gvar(bins, 0.0);
  double sum_noise = 0.0;
  for (int r = 0; r < kRuns; ++r) {
    const auto y = simulate(sys, u, derive_seed(kSeed, static_cast<std::uint64_t>(r)));
    const auto est = estimate_frf(U, dft(y), cfg);
    for (std::size_t i = 0; i < bins; ++i) {
      sum[i] += est.g_bla[i];
      sum_sq[i] += std::norm(est.g_bla[i]);
      sum_gvar[i] += est.g_var[i];
      sum_noise += est.noise_var[i];
    }
  }
  int within = 0;
  double ratio_sum = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const double mean_sq = std::norm(sum[i] / static_cast<double>(kRuns));
    const double sample_var = (sum_sq[i] - kRuns * mean_sq) / (kRuns - 1);
    const double ratio = sample_var / (sum_gvar[i] / kRuns);
    ratio_sum += ratio;
    if (ratio <= 1.3 && ratio >= 1.0 / 1.3) ++within;
  }
  const double mean_noise = sum_noise / (static_cast<double>(kRuns) * static_cast<double>(bins));
  Metrics m{{"fraction_within_1p3", static_cast<double>(within) / static_cast<double>(bins)},
            {"mean_var_ratio", ratio_sum / static_cast<double>(bins)},
            {"mean_noise_var", mean_noise},
            {"noise_var_rel_err", std::abs(mean_noise / (kNoise * kNoise) - 1.0)}};
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"runs", kRuns}, {"noise_std", kNoise}, {"R", 2}, {"n", 4}, {"seed", kSeed}};
  return m;
}

ConcatDataset dataset_from(const std::vector<CampaignMember>& members) {
  ConcatDataset ds;
  ds.sample_rate_hz = members.front().input.sample_rate_hz;
  for (const auto& mem : members) ds.subrecords.push_back({mem.input.samples, mem.output.samples, mem.system.op_point});
  return ds;
}

Metrics concat_correctness(Context& ctx) {
  Stopwatch clock;
  constexpr std::uint64_t kSeed = 104;
  const std::vector<WienerSurrogate> family(2, surrogate_with(0.0, 0.0, 0.0));
  const auto spec = full_grid(5000, kSeed);
  CampaignOptions options;
  options.initial_state_std = 3.0;
  options.redraw_phases = true;
  const auto members = make_campaign(family, spec, 1, {}, kSeed, options);
  const auto ds = dataset_from(members);
  const int total = ds.total_length();
  const auto band = band_to_bins(1.0, 5.0, ds.sample_rate_hz, total);
  const auto cfg = ConcatConfig::defaults(band, ds.n_concat());
  const auto est = estimate_frf_concat(ds, cfg);
  const auto truth = family.front().linear.response_at_bins(est.bins, total);
  const double concat_err = max_relative_error(est.g_bla, truth);

  const auto spectra = concat_and_transform(ds);
  LpmConfig blind;
  blind.poly_order = cfg.poly_order;
  blind.half_window = cfg.half_window;
  blind.band = band;
  const auto blind_est = estimate_frf(spectra.input, spectra.output, blind);
  const double blind_err = max_relative_error(blind_est.g_bla, truth);

  double rejects = 0.0;
  ConcatConfig small;
  small.poly_order = 2;
  small.half_window = 3;
  small.band = band;
  try {
    (void)estimate_frf_concat(ds, small);
  } catch (const ConfigError& err) {
    if (std::string_view(err.what()).find("2n+1 >= (R+1)(1+N_c)") != std::string_view::npos) rejects = 1.0;
  }
  Metrics m{{"concat_max_rel_err", concat_err},
            {"blind_max_rel_err", blind_err},
            {"improvement_vs_blind", blind_err / concat_err},
            {"rejects_small_window", rejects}};
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"subrecords", 2}, {"N_each", 5000}, {"R", cfg.poly_order}, {"n", cfg.half_window},
                {"initial_state_std", options.initial_state_std}, {"seed", kSeed}};
  if (auto d = ctx.dir("concat_correctness")) {
    io::write_frf(*d / "frf_concat.csv", est);
    io::write_frf(*d / "frf_blind.csv", blind_est);
  }
  return m;
}

Metrics concat_vs_single(Context& ctx) {
  Stopwatch clock;
  constexpr int kRuns = 100;
  constexpr int kHalf = 5000;
  constexpr double kNoise = 0.01;
  constexpr std::uint64_t kSeed = 105;
  constexpr int kHalfWindow = 6;
  const auto spec = full_grid(kHalf, kSeed);
  const auto band = band_to_bins(1.0, 5.0, spec.sample_rate_hz, 2 * kHalf);
  double sum_single = 0.0;
  double sum_concat = 0.0;
  int runs_concat_larger = 0;
  for (int r = 0; r < kRuns; ++r) {
    const auto run_seed = derive_seed(kSeed, static_cast<std::uint64_t>(r));
    const std::vector<WienerSurrogate> family(2, surrogate_with(0.0, 0.0, kNoise));
    CampaignOptions options;
    options.redraw_phases = true;
    const auto members = make_campaign(family, spec, 1, {}, run_seed, options);
    const auto ds = dataset_from(members);

    // Same excitation applied as one continuous record.
    SignalRecord u;
    u.samples = ds.subrecords[0].u;
    u.samples.insert(u.samples.end(), ds.subrecords[1].u.begin(), ds.subrecords[1].u.end());
    u.samples_per_period = 2 * kHalf;
    u.sample_rate_hz = spec.sample_rate_hz;
    auto sys = members[0].system;
    const auto y = simulate(sys, u, derive_seed(run_seed, 99));
    LpmConfig single_cfg;
    single_cfg.half_window = kHalfWindow;
    single_cfg.band = band;
    single_cfg.estimate_noise_var = true;
    const auto single = estimate_frf(dft(u), dft(y), single_cfg);

    auto concat_cfg = ConcatConfig::defaults(band, 2);
    concat_cfg.half_window = kHalfWindow;
    const auto concat = estimate_frf_concat(ds, concat_cfg);
    const double ms = std::accumulate(single.g_var.begin(), single.g_var.end(), 0.0) / single.size();
    const double mc = std::accumulate(concat.g_var.begin(), concat.g_var.end(), 0.0) / concat.size();
    sum_single += ms;
    sum_concat += mc;
    if (mc > ms) ++runs_concat_larger;
  }
  Metrics m{{"mean_gvar_single", sum_single / kRuns},
            {"mean_gvar_concat", sum_concat / kRuns},
            {"mean_gvar_ratio", sum_concat / sum_single},
            {"fraction_runs_concat_larger", static_cast<double>(runs_concat_larger) / kRuns}};
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"runs", kRuns}, {"total_length", 2 * kHalf}, {"noise_std", kNoise}, {"R", 2}, {"n", kHalfWindow},
                {"seed", kSeed}};
  return m;
}

Metrics averaged_vs_concat(Context& ctx) {
  Stopwatch clock;
  constexpr int kRecords = 3;
  constexpr double kNoise = 0.01;
  constexpr std::uint64_t kSeed = 106;
  const std::vector<WienerSurrogate> family(kRecords, surrogate_with(0.0, 0.0, kNoise));
  const auto spec = full_grid(5000, kSeed);
  CampaignOptions options;
  options.redraw_phases = true;
  const auto members = make_campaign(family, spec, 1, {}, kSeed, options);

  LpmConfig cfg;
  cfg.half_window = 4;
  cfg.band = spec.band;
  cfg.estimate_noise_var = true;
  std::vector<FrfEstimate> individual;
  for (const auto& mem : members) individual.push_back(estimate_frf(dft(mem.input), dft(mem.output), cfg));
  const auto common = average_blas(individual);

  const auto ds = dataset_from(members);
  const auto band = band_to_bins(1.0, 5.0, ds.sample_rate_hz, ds.total_length());
  const auto concat_cfg = ConcatConfig::defaults(band, kRecords);
  const auto concat = estimate_frf_concat(ds, concat_cfg);
  const auto averaged_view = view_of(common);
  const auto concat_view = view_of(select_lines_at(concat, averaged_view.freq_hz));
  const auto cmp = compare_blas(averaged_view, concat_view);

  Metrics m{{"mean_abs_difference", cmp.mean_abs_difference},
            {"mean_pooled_std", cmp.mean_pooled_std},
            {"diff_over_pooled", cmp.mean_abs_difference / cmp.mean_pooled_std},
            {"fraction_concat_var_ge_avg", cmp.fraction_b_var_ge_a},
            {"variance_ratio", cmp.variance_ratio},
            {"max_gap_db", cmp.max_gap_db}};
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"records", kRecords}, {"noise_std", kNoise}, {"n_individual", 4}, {"n_concat", concat_cfg.half_window},
                {"seed", kSeed}};
  if (auto d = ctx.dir("averaged_vs_concat")) {
    io::write_common_bla(*d / "averaged.csv", common);
    io::write_frf(*d / "concat.csv", concat);
    io::write_comparison(*d / "comparison.csv", cmp);
  }
  return m;
}

Metrics bla_oracle(Context& ctx) {
  Stopwatch clock;
  constexpr int kCrossRealizations = 200;
  constexpr int kLpmRealizations = 50;
  constexpr std::uint64_t kSeed = 107;
  constexpr double kAlpha3 = 0.1;
  const auto sys = surrogate_with(0.0, kAlpha3, 0.0);
  const auto base = full_grid(5000, kSeed);
  const double factor = bussgang_factor(sys, base);
  const auto truth = true_bla(sys, base);
  const auto linear = sys.linear.response_at_bins(base.excited_bins, base.samples_per_period);

  LpmConfig cfg;
  cfg.half_window = 6;
  cfg.band = base.band;
  const auto bins = base.excited_bins.size();
  ComplexVector s_yu(bins);
  std::vector<double> s_uu(bins, 0.0);
  ComplexVector lpm_sum(bins);
  for (int r = 0; r < kCrossRealizations; ++r) {
    auto spec = full_grid(5000, derive_seed(kSeed, static_cast<std::uint64_t>(r)));
    const auto u = render_multisine(spec, 2);
    const auto y = simulate(sys, u, 0);
    const auto up = split_periods(u, 1);
    const auto yp = split_periods(y, 1);
    const auto U = dft(up.front());
    const auto Y = dft(yp.front());
    for (std::size_t i = 0; i < bins; ++i) {
      const int k = base.excited_bins[i];
      s_yu[i] += Y[k] * std::conj(U[k]);
      s_uu[i] += std::norm(U[k]);
    }
    if (r < kLpmRealizations) {
      const auto est = estimate_frf(U, Y, cfg);
      for (std::size_t i = 0; i < bins; ++i) lpm_sum[i] += est.g_bla[i];
    }
  }
  double cross_factor = 0.0;
  double cross_max_dev = 0.0;
  double lpm_max = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const Complex ratio = s_yu[i] / s_uu[i] / linear[i];
    cross_factor += ratio.real();
    cross_max_dev = std::max(cross_max_dev, std::abs(ratio - factor) / factor);
    const double mag = std::abs(lpm_sum[i] / static_cast<double>(kLpmRealizations));
    lpm_max = std::max(lpm_max, std::abs(mag - std::abs(truth[i])) / std::abs(truth[i]));
  }
  cross_factor /= static_cast<double>(bins);
  Metrics m{{"bussgang_factor", factor},
            {"cross_spectral_factor", cross_factor},
            {"cross_spectral_factor_rel_err", std::abs(cross_factor - factor) / factor},
            {"cross_spectral_max_bin_dev", cross_max_dev},
            {"lpm_max_rel_mag_err", lpm_max}};
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"alpha3", kAlpha3}, {"cross_realizations", kCrossRealizations},
                {"lpm_realizations", kLpmRealizations}, {"R", 2}, {"n", 6}, {"seed", kSeed}};
  return m;
}

DistortionReport distortion_run(const WienerSurrogate& sys, const MultisineSpec& spec, std::uint64_t seed) {
  const auto u = render_multisine(spec, 7);
  const auto y = simulate(sys, u, seed);
  std::vector<SpectrumRecord> periods;
  for (const auto& p : split_periods(y, 1)) periods.push_back(dft(p));
  return analyze_distortions(periods, spec);
}

double excess_db(const DistortionReport& r, const LineLevels& levels) {
  return levels.mean_db() - r.noise_floor_mean_db(levels);
}

Metrics distortion_selectivity(Context& ctx) {
  Stopwatch clock;
  constexpr std::uint64_t kSeed = 108;
  constexpr double kNoise = 1e-3;
  MultisineDesign design;
  design.seed = kSeed;
  const auto spec = design_multisine(design);
  const auto even_only = distortion_run(surrogate_with(0.1, 0.0, kNoise), spec, derive_seed(kSeed, 1));
  const auto odd_only = distortion_run(surrogate_with(0.0, 0.1, kNoise), spec, derive_seed(kSeed, 2));
  Metrics m{{"a2_even_excess_db", excess_db(even_only, even_only.even_nl)},
            {"a2_odd_excess_db", excess_db(even_only, even_only.odd_nl)},
            {"a3_odd_excess_db", excess_db(odd_only, odd_only.odd_nl)},
            {"a3_even_excess_db", excess_db(odd_only, odd_only.even_nl)}};
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"alpha2", 0.1}, {"alpha3", 0.1}, {"noise_std", kNoise}, {"periods", 7}, {"discard", 1},
                {"seed", kSeed}};
  if (auto d = ctx.dir("distortion_selectivity")) {
    io::write_distortion(*d / "alpha2_only.csv", even_only);
    io::write_distortion(*d / "alpha3_only.csv", odd_only);
  }
  return m;
}

// Surrogate FRF on the in-band grid with independent complex Gaussian noise of
// known variance.
FitData noisy_frf(const RationalModel& truth, double noise_std, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = noise_std / std::sqrt(2.0);
  FitData data;
  data.n_lines = 5000;
  for (int k = 100; k <= 500; ++k) {
    data.bins.push_back(k);
    data.theta.push_back(2.0 * std::numbers::pi * k / 5000.0);
    const double re = scale * normal(rng);
    const double im = scale * normal(rng);
    data.g.push_back(truth.response(data.theta.back()) + Complex(re, im));
    data.variance.push_back(noise_std * noise_std);
  }
  return data;
}

Metrics order_select_3(Context& ctx) {
  Stopwatch clock;
  constexpr int kRepetitions = 100;
  constexpr double kFrfNoise = 3e-4;
  constexpr double kTimeNoise = 0.01;
  constexpr std::uint64_t kSeed = 109;
  const std::vector<std::pair<int, int>> grid{{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}};
  const auto truth = WienerSurrogate::default_surrogate().linear;
  int hits = 0;
  std::map<std::string, int> picks;
  for (int r = 0; r < kRepetitions; ++r) {
    const auto sel = select_order(noisy_frf(truth, kFrfNoise, derive_seed(kSeed, static_cast<std::uint64_t>(r))), grid);
    if (sel.best.nb() == 3 && sel.best.na() == 3) ++hits;
    ++picks[std::to_string(sel.best.nb()) + "_" + std::to_string(sel.best.na())];
  }

  // Same selection on LPM estimates from simulated records. Neighbouring LPM
  // estimates share data, so their errors are correlated; reported only.
  auto sys = surrogate_with(0.0, 0.0, kTimeNoise);
  int lpm_hits = 0;
  for (int r = 0; r < kRepetitions; ++r) {
    const auto run_seed = derive_seed(kSeed + 1, static_cast<std::uint64_t>(r));
    const auto spec = full_grid(5000, run_seed);
    std::mt19937_64 rng(run_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& s : sys.initial_state) s = normal(rng);
    const auto u = render_multisine(spec, 1);
    const auto y = simulate(sys, u, derive_seed(run_seed, 1));
    LpmConfig cfg;
    cfg.half_window = 4;
    cfg.band = spec.band;
    cfg.estimate_noise_var = true;
    const auto est = estimate_frf(dft(u), dft(y), cfg);
    const auto sel = select_order(fit_data_from(est), grid);
    if (sel.best.nb() == 3 && sel.best.na() == 3) ++lpm_hits;
  }

  // Exact rational data, uniform weights.
  FitData exact = noisy_frf(truth, 0.0, 0);
  FitOptions uniform;
  uniform.weighting = Weighting::uniform;
  const auto fitted = fit_tf(exact, 3, 3, uniform);
  double coef_err = 0.0;
  for (std::size_t i = 0; i < truth.b.size(); ++i) coef_err = std::max(coef_err, std::abs(fitted.b[i] - truth.b[i]));
  for (std::size_t i = 0; i < truth.a.size(); ++i) coef_err = std::max(coef_err, std::abs(fitted.a[i] - truth.a[i]));

  Metrics m{{"fraction_selected_3_3", static_cast<double>(hits) / kRepetitions},
            {"lpm_pipeline_fraction_3_3", static_cast<double>(lpm_hits) / kRepetitions},
            {"roundtrip_max_coef_err", coef_err}};
  for (const auto& [key, count] : picks) m["picked_" + key] = count;
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"repetitions", kRepetitions}, {"frf_noise_std", kFrfNoise}, {"time_noise_std", kTimeNoise},
                {"grid", grid}, {"weighting", "variance"}, {"seed", kSeed}};
  return m;
}

// A compact end-to-end pipeline whose outputs must be byte-stable.
void determinism_pipeline(const fs::path& dir) {
  constexpr std::uint64_t kSeed = 110;
  MultisineDesign design;
  design.seed = kSeed;
  const auto spec = design_multisine(design);
  io::write_spec(dir / "spec.json", spec);
  auto sys = surrogate_with(0.05, 0.05, 1e-3);
  const std::vector<WienerSurrogate> family(2, sys);
  const auto members = make_campaign(family, spec, 3, {}, kSeed);
  std::vector<FrfEstimate> estimates;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& mem = members[i];
    const auto name = "record" + std::to_string(i);
    io::write_record(dir / (name + ".csv"), mem.input, mem.output);
    const auto up = split_periods(mem.input, 1);
    const auto yp = split_periods(mem.output, 1);
    std::vector<SpectrumRecord> us;
    std::vector<SpectrumRecord> ys;
    for (std::size_t p = 0; p < up.size(); ++p) {
      us.push_back(dft(up[p]));
      ys.push_back(dft(yp[p]));
    }
    const auto report = analyze_distortions(ys, spec);
    io::write_distortion(dir / (name + "_distortion.csv"), report);
    LpmConfig cfg = LpmConfig::defaults(spec.band, true);
    cfg.lines = spec.excited_bins;
    estimates.push_back(estimate_frf(period_average(us).mean, period_average(ys).mean, cfg));
    io::write_frf(dir / (name + "_frf.csv"), estimates.back());
  }
  const auto common = average_blas(estimates);
  io::write_common_bla(dir / "averaged.csv", common);
  const auto model = fit_tf(fit_data_from(common), 3, 3);
  io::write_model(dir / "model.json", model, 1.0, 5.0);
}

Metrics determinism(Context& ctx) {
  Stopwatch clock;
  const auto stamp = std::to_string(std::chrono::steady_clock::now().time_since_epoch().count());
  const fs::path root = ctx.artifacts ? *ctx.artifacts / "determinism" : fs::temp_directory_path() / ("blalab-det-" + stamp);
  const fs::path a = root / "run_a";
  const fs::path b = root / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  fs::create_directories(a);
  fs::create_directories(b);
  determinism_pipeline(a);
  determinism_pipeline(b);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a)) files.push_back(entry.path().filename());
  std::sort(files.begin(), files.end());
  bool identical = true;
  for (const auto& f : files) {
    if (!fs::exists(b / f) || io::read_text(a / f) != io::read_text(b / f)) identical = false;
  }
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(b)) ++count_b;
  if (count_b != files.size()) identical = false;
  if (!ctx.artifacts) fs::remove_all(root);
  Metrics m{{"identical_files", identical ? 1.0 : 0.0}, {"files_compared", static_cast<double>(files.size())}};
  m["runtime_s"] = clock.seconds();
  ctx.config = {{"seed", 110}, {"records", 2}, {"periods", 3}};
  return m;
}

struct Entry {
  const char* id;
  Metrics (*run)(Context&);
};

constexpr Entry kRegistry[] = {
    {"design_arithmetic", design_arithmetic},
    {"lpm_accuracy", lpm_accuracy},
    {"leakage_ladder", leakage_ladder},
    {"variance_calibration", variance_calibration},
    {"concat_correctness", concat_correctness},
    {"concat_vs_single", concat_vs_single},
    {"averaged_vs_concat", averaged_vs_concat},
    {"bla_oracle", bla_oracle},
    {"distortion_selectivity", distortion_selectivity},
    {"order_select_3", order_select_3},
    {"determinism", determinism},
};

ThresholdTable parse_table(std::string_view text) {
  const json j = json::parse(text);
  ThresholdTable table;
  table.version = j.at("version").get<std::string>();
  for (const auto& row : j.at("thresholds")) {
    table.rows.push_back(Threshold{row.at("scenario").get<std::string>(), row.at("metric").get<std::string>(),
                                   row.at("op").get<std::string>(), row.at("value").get<double>()});
  }
  return table;
}

}  // namespace

bool Threshold::satisfied_by(double measured) const {
  if (std::isnan(measured)) return false;
  if (op == "<") return measured < value;
  if (op == "<=") return measured <= value;
  if (op == ">") return measured > value;
  if (op == ">=") return measured >= value;
  if (op == "==") return measured == value;
  throw ConfigError("threshold: unknown operator '" + op + "'");
}

std::vector<Threshold> ThresholdTable::for_scenario(const std::string& id) const {
  std::vector<Threshold> out;
  for (const auto& row : rows) {
    if (row.scenario == id) out.push_back(row);
  }
  return out;
}

const ThresholdTable& thresholds() {
  static const ThresholdTable table = parse_table(detail::kThresholdsJson);
  return table;
}

std::vector<std::string> scenario_ids() {
  std::vector<std::string> ids;
  for (const auto& e : kRegistry) ids.emplace_back(e.id);
  return ids;
}

bool evaluate(const std::string& id, const std::map<std::string, double>& metrics, std::vector<std::string>* failed) {
  bool pass = true;
  for (const auto& t : thresholds().for_scenario(id)) {
    const auto it = metrics.find(t.metric);
    std::string reason;
    if (it == metrics.end()) {
      reason = t.metric + " missing";
    } else if (!t.satisfied_by(it->second)) {
      reason = t.metric + " " + t.op + " " + io::format_double(t.value) + " violated (measured " +
               io::format_double(it->second) + ")";
    }
    if (!reason.empty()) {
      pass = false;
      if (failed) failed->push_back(reason);
    }
  }
  return pass;
}

ScenarioResult run_scenario(const std::string& id, const std::optional<fs::path>& artifacts) {
  for (const auto& e : kRegistry) {
    if (id != e.id) continue;
    Context ctx;
    ctx.artifacts = artifacts;
    ScenarioResult result;
    result.scenario_id = id;
    result.metrics = e.run(ctx);
    result.pass = evaluate(id, result.metrics, &result.failed_checks);
    result.config_json = ctx.config.dump();
    if (auto d = ctx.dir(id)) {
      json metrics(result.metrics);
      io::write_text(*d / "metrics.json",
                     json{{"scenario", id}, {"metrics", metrics}, {"pass", result.pass}, {"config", ctx.config}}.dump(2) +
                         "\n");
    }
    return result;
  }
  throw ConfigError("bench: unknown scenario '" + id + "'");
}

std::string report_csv(const std::vector<ScenarioResult>& results) {
  std::ostringstream out;
  out << "scenario,metric,value,pass\n";
  for (const auto& r : results) {
    const auto checks = thresholds().for_scenario(r.scenario_id);
    for (const auto& [metric, value] : r.metrics) {
      std::string verdict;
      for (const auto& t : checks) {
        if (t.metric != metric) continue;
        const bool ok = t.satisfied_by(value);
        verdict = (verdict.empty() || verdict == "1") && ok ? "1" : "0";
      }
      out << r.scenario_id << ',' << metric << ',' << io::format_double(value) << ',' << verdict << '\n';
    }
    out << r.scenario_id << ",pass," << (r.pass ? 1 : 0) << ',' << (r.pass ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace blalab::bench
