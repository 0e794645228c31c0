// SPDX-License-Identifier: Apache-2.0
#include "blalab_cli/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "blalab/bench_suite.hpp"
#include "blalab/errors.hpp"
#include "blalab/io.hpp"
#include "blalab/svg_plot.hpp"
#include "blalab/version.hpp"

namespace blalab::cli {
namespace {
namespace fs = std::filesystem;
using nlohmann::json;

// Recorded next to every artifact so the producing command can be replayed.
struct Provenance {
  std::string subcommand;
  std::vector<std::string> argv;
  std::vector<std::string> inputs;
  json config = json::object();
  std::optional<std::uint64_t> seed;

  void write_for(const fs::path& artifact) const {
    json j{{"tool", "blalab"},
           {"version", std::string(kVersion)},
           {"subcommand", subcommand},
           {"argv", argv},
           {"inputs", inputs},
           {"config", config},
           {"seed", nullptr}};
    if (seed) j["seed"] = *seed;
    io::write_text(io::provenance_path(artifact), j.dump(2) + "\n");
  }
};

std::optional<std::uint64_t> env_seed() {
  const char* value = std::getenv("BLALAB_SEED");
  if (!value || !*value) return std::nullopt;
  std::uint64_t seed = 0;
  const std::string_view text(value);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("BLALAB_SEED must be an unsigned 64-bit integer, got '" + std::string(text) + "'");
  }
  return seed;
}

std::uint64_t effective_seed(std::uint64_t flag) { return env_seed().value_or(flag); }

std::pair<double, double> parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("band must look like LO:HI in Hz, got '" + text + "'");
  try {
    std::size_t used_lo = 0;
    std::size_t used_hi = 0;
    const double lo = std::stod(text.substr(0, colon), &used_lo);
    const double hi = std::stod(text.substr(colon + 1), &used_hi);
    if (used_lo != colon || used_hi != text.size() - colon - 1) throw std::invalid_argument("trailing text");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ConfigError("band must look like LO:HI in Hz, got '" + text + "'");
  }
}

std::vector<std::pair<int, int>> parse_order_grid(const std::string& orders, const std::string& grid) {
  std::vector<std::pair<int, int>> out;
  if (!grid.empty()) {
    std::stringstream ss(grid);
    std::string item;
    while (std::getline(ss, item, ';')) {
      const auto comma = item.find(',');
      if (comma == std::string::npos) throw ConfigError("order grid entries must look like NB,NA");
      try {
        out.emplace_back(std::stoi(item.substr(0, comma)), std::stoi(item.substr(comma + 1)));
      } catch (const std::logic_error&) {
        throw ConfigError("order grid entries must look like NB,NA, got '" + item + "'");
      }
    }
    return out;
  }
  const auto colon = orders.find(':');
  try {
    const int lo = std::stoi(orders.substr(0, colon));
    const int hi = colon == std::string::npos ? lo : std::stoi(orders.substr(colon + 1));
    if (lo < 0 || hi < lo) throw ConfigError("order range must satisfy 0 <= LO <= HI");
    for (int k = lo; k <= hi; ++k) out.emplace_back(k, k);
  } catch (const std::logic_error&) {
    throw ConfigError("order range must look like LO:HI, got '" + orders + "'");
  }
  return out;
}

GridKind parse_grid(const std::string& name) { return grid_kind_from_string(name); }

// Estimate files are either single FRFs or averaged BLAs.
struct AnyEstimate {
  std::optional<FrfEstimate> frf;
  std::optional<CommonBla> common;

  BlaView view() const { return frf ? view_of(*frf) : view_of(*common); }
  FitData fit_data() const { return frf ? fit_data_from(*frf) : fit_data_from(*common); }
  int n_lines() const { return frf ? frf->n_lines : common->n_lines; }
};

AnyEstimate read_estimate(const fs::path& path) {
  AnyEstimate e;
  if (io::detect_estimate_kind(path) == io::EstimateKind::frf) {
    e.frf = io::read_frf(path);
  } else {
    e.common = io::read_common_bla(path);
  }
  return e;
}

void write_companion_csv(const fs::path& svg, const plot::Figure& fig) {
  std::ostringstream out;
  out << "series,x,y,band_lo,band_hi\n";
  for (const auto& s : fig.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const bool band = s.band_lo.size() == s.x.size();
      out << s.name << ',' << io::format_double(s.x[i]) << ',' << io::format_double(s.y[i]) << ','
          << (band ? io::format_double(s.band_lo[i]) : "") << ',' << (band ? io::format_double(s.band_hi[i]) : "")
          << '\n';
    }
  }
  fs::path csv = svg;
  io::write_text(csv.replace_extension(".data.csv"), out.str());
}

std::vector<SpectrumRecord> period_spectra(const SignalRecord& record, int discard) {
  std::vector<SpectrumRecord> out;
  for (const auto& p : split_periods(record, discard)) out.push_back(dft(p));
  return out;
}

int default_discard(const SignalRecord& record, int requested) {
  if (requested >= 0) return requested;
  return record.n_periods > 1 ? 1 : 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Best linear approximation toolkit: multisine design, local polynomial FRF estimation, "
               "distortion analysis and parametric fitting"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Provenance prov;
  prov.argv = args;

  // design
  auto* design_cmd = app.add_subcommand("design", "Design a random-phase multisine");
  MultisineDesign design;
  std::string design_grid = "odd_random";
  std::string design_band = "1:5";
  fs::path design_out = "spec.json";
  fs::path design_signal;
  int design_periods = 7;
  design_cmd->add_option("--band", design_band, "Excited band LO:HI in Hz")->capture_default_str();
  design_cmd->add_option("--fs", design.sample_rate_hz, "Sample rate in Hz")->capture_default_str();
  design_cmd->add_option("--N", design.samples_per_period, "Samples per period")->capture_default_str();
  design_cmd->add_option("--grid", design_grid, "full, odd or odd_random")->capture_default_str();
  design_cmd->add_option("--group", design.detection_group_size, "Odd lines per detection group")->capture_default_str();
  design_cmd->add_option("--rms", design.rms_target, "Time-domain RMS")->capture_default_str();
  design_cmd->add_option("--seed", design.seed, "Phase and grid seed")->capture_default_str();
  design_cmd->add_option("--out", design_out, "Spec JSON")->capture_default_str();
  design_cmd->add_option("--signal", design_signal, "Also write the rendered excitation as a record CSV");
  design_cmd->add_option("--periods", design_periods, "Periods in --signal")->capture_default_str();

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the Wiener surrogate for a multisine");
  fs::path sim_spec;
  fs::path sim_system;
  fs::path sim_out = "rec.csv";
  fs::path sim_manifest;
  int sim_periods = 7;
  int sim_records = 1;
  std::vector<int> sim_lengths;
  std::optional<double> sim_alpha2;
  std::optional<double> sim_alpha3;
  std::optional<double> sim_noise;
  double sim_state_std = 0.0;
  std::uint64_t sim_seed = 0;
  OperatingPoint sim_op;
  sim_cmd->add_option("--spec", sim_spec, "Spec JSON from 'design'")->required();
  sim_cmd->add_option("--system", sim_system, "Surrogate JSON (default: built-in third-order surrogate)");
  sim_cmd->add_option("--periods", sim_periods, "Periods per record")->capture_default_str();
  sim_cmd->add_option("--alpha2", sim_alpha2, "Quadratic coefficient");
  sim_cmd->add_option("--alpha3", sim_alpha3, "Cubic coefficient");
  sim_cmd->add_option("--noise", sim_noise, "Output noise standard deviation");
  sim_cmd->add_option("--initial-state-std", sim_state_std, "Random initial filter state")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Noise and state seed")->capture_default_str();
  sim_cmd->add_option("--soc", sim_op.soc_pct, "State of charge in percent")->capture_default_str();
  sim_cmd->add_option("--temperature", sim_op.temperature_c, "Temperature in deg C")->capture_default_str();
  sim_cmd->add_option("--label", sim_op.label, "Operating point label");
  sim_cmd->add_option("--out", sim_out, "Record CSV (single record)")->capture_default_str();
  sim_cmd->add_option("--manifest", sim_manifest, "Write a campaign of sub-records and this manifest");
  sim_cmd->add_option("--records", sim_records, "Campaign size")->capture_default_str();
  sim_cmd->add_option("--lengths", sim_lengths, "Campaign record lengths in samples")->delimiter(',');

  // estimate
  auto* est_cmd = app.add_subcommand("estimate", "Local polynomial FRF estimate of one record");
  fs::path est_in;
  fs::path est_out = "frf.csv";
  fs::path est_spec;
  fs::path est_transients;
  std::string est_band = "1:5";
  std::string est_frame = "period";
  int est_R = 2;
  std::optional<int> est_n;
  int est_discard = -1;
  est_cmd->add_option("--in", est_in, "Record CSV")->required();
  est_cmd->add_option("--R", est_R, "Local polynomial order")->capture_default_str();
  est_cmd->add_option("--n", est_n, "Half window; default R + 2");
  est_cmd->add_option("--band", est_band, "Band LO:HI in Hz")->capture_default_str();
  est_cmd->add_option("--frame", est_frame, "period: average steady-state periods; record: whole record")
      ->check(CLI::IsMember({"period", "record"}))
      ->capture_default_str();
  est_cmd->add_option("--discard", est_discard, "Leading periods dropped in period frame (default 1 if available)");
  est_cmd->add_option("--spec", est_spec, "Restrict estimation to the spec's excited lines");
  est_cmd->add_option("--transients", est_transients, "Also write the transient estimate CSV");
  est_cmd->add_option("--out", est_out, "FRF CSV")->capture_default_str();

  // estimate-concat
  auto* cat_cmd = app.add_subcommand("estimate-concat", "Common FRF from concatenated sub-records");
  fs::path cat_manifest;
  fs::path cat_out = "frf_concat.csv";
  fs::path cat_transients;
  std::string cat_band = "1:5";
  int cat_R = 2;
  std::optional<int> cat_n;
  bool cat_no_noise = false;
  cat_cmd->add_option("--manifest", cat_manifest, "Manifest JSON")->required();
  cat_cmd->add_option("--R", cat_R, "Local polynomial order")->capture_default_str();
  cat_cmd->add_option("--n", cat_n, "Half window; default ceil(((R+1)(1+N_c)+2)/2)");
  cat_cmd->add_option("--band", cat_band, "Band LO:HI in Hz")->capture_default_str();
  cat_cmd->add_flag("--no-noise-var", cat_no_noise, "Skip the noise variance (allows 2n+1 == (R+1)(1+N_c))");
  cat_cmd->add_option("--transients", cat_transients, "Also write per-splice transients CSV");
  cat_cmd->add_option("--out", cat_out, "FRF CSV")->capture_default_str();

  // average
  auto* avg_cmd = app.add_subcommand("average", "Average FRF estimates into a common BLA");
  std::vector<fs::path> avg_in;
  fs::path avg_out = "common_bla.csv";
  avg_cmd->add_option("--in", avg_in, "FRF CSVs")->required();
  avg_cmd->add_option("--out", avg_out, "Common BLA CSV")->capture_default_str();

  // distortions
  auto* dist_cmd = app.add_subcommand("distortions", "Classify output lines of an odd multisine record");
  fs::path dist_in;
  fs::path dist_spec;
  fs::path dist_out = "distortion.csv";
  int dist_discard = -1;
  dist_cmd->add_option("--in", dist_in, "Record CSV")->required();
  dist_cmd->add_option("--spec", dist_spec, "Spec JSON")->required();
  dist_cmd->add_option("--discard", dist_discard, "Leading periods dropped (default 1 if available)");
  dist_cmd->add_option("--out", dist_out, "Distortion CSV")->capture_default_str();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Rational transfer function fit with MDL order selection");
  fs::path fit_in;
  fs::path fit_out = "model.json";
  fs::path fit_overlay;
  fs::path fit_table;
  std::optional<int> fit_nb;
  std::optional<int> fit_na;
  std::string fit_orders = "1:5";
  std::string fit_grid;
  std::string fit_weighting = "variance";
  fit_cmd->add_option("--in", fit_in, "FRF or common BLA CSV")->required();
  fit_cmd->add_option("--nb", fit_nb, "Numerator order (fixed-order fit)");
  fit_cmd->add_option("--na", fit_na, "Denominator order (fixed-order fit)");
  fit_cmd->add_option("--orders", fit_orders, "Diagonal order range LO:HI for selection")->capture_default_str();
  fit_cmd->add_option("--grid", fit_grid, "Explicit order grid 'NB,NA;NB,NA;...'");
  fit_cmd->add_option("--weighting", fit_weighting, "variance or uniform")
      ->check(CLI::IsMember({"variance", "uniform"}))
      ->capture_default_str();
  fit_cmd->add_option("--overlay", fit_overlay, "Measured vs model CSV");
  fit_cmd->add_option("--table", fit_table, "Per-order cost and MDL CSV");
  fit_cmd->add_option("--out", fit_out, "Model JSON")->capture_default_str();

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Compare two BLA estimates on a common grid");
  fs::path cmp_a;
  fs::path cmp_b;
  fs::path cmp_out = "comparison.csv";
  cmp_cmd->add_option("--a", cmp_a, "First estimate (e.g. averaged)")->required();
  cmp_cmd->add_option("--b", cmp_b, "Second estimate (e.g. concatenated)")->required();
  cmp_cmd->add_option("--out", cmp_out, "Comparison CSV")->capture_default_str();

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "SVG plots with companion CSV");
  fs::path plot_frf;
  fs::path plot_dist;
  fs::path plot_avg;
  fs::path plot_concat;
  fs::path plot_model;
  fs::path plot_out = "plot.svg";
  plot_cmd->add_option("--frf", plot_frf, "FRF or common BLA CSV");
  plot_cmd->add_option("--distortion", plot_dist, "Distortion CSV");
  plot_cmd->add_option("--averaged", plot_avg, "Averaged BLA for a comparison plot");
  plot_cmd->add_option("--concat", plot_concat, "Concatenated BLA for a comparison plot");
  plot_cmd->add_option("--model", plot_model, "Model JSON overlaid on a comparison plot");
  plot_cmd->add_option("--out", plot_out, "SVG path; series data go to <stem>.data.csv")->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Acceptance scenarios");
  bench_cmd->require_subcommand(1);
  auto* bench_list = bench_cmd->add_subcommand("list", "List scenario ids");
  auto* bench_run = bench_cmd->add_subcommand("run", "Run scenarios");
  bool bench_all = false;
  std::vector<std::string> bench_ids;
  fs::path bench_report = "bench_report.csv";
  fs::path bench_artifacts;
  bench_run->add_flag("--all", bench_all, "Run every scenario");
  bench_run->add_option("--id", bench_ids, "Scenario id (repeatable)");
  bench_run->add_option("--out", bench_report, "CSV report")->capture_default_str();
  bench_run->add_option("--artifacts", bench_artifacts, "Directory for per-scenario artifacts");

  std::vector<const char*> argv{"blalab"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::CallForVersion&) {
      out << kVersion << '\n';
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kExitConfig;
    }

    if (design_cmd->parsed()) {
      const auto [lo, hi] = parse_band(design_band);
      design.f_lo_hz = lo;
      design.f_hi_hz = hi;
      design.grid_kind = parse_grid(design_grid);
      design.seed = effective_seed(design.seed);
      const auto spec = design_multisine(design);
      io::write_spec(design_out, spec);
      prov.subcommand = "design";
      prov.seed = design.seed;
      prov.config = {{"band_hz", {lo, hi}}, {"fs", design.sample_rate_hz}, {"N", design.samples_per_period},
                     {"grid", design_grid}, {"group", design.detection_group_size}, {"rms", design.rms_target}};
      prov.write_for(design_out);
      if (!design_signal.empty()) {
        const auto u = render_multisine(spec, design_periods);
        SignalRecord zeros = u;
        std::fill(zeros.samples.begin(), zeros.samples.end(), 0.0);
        io::write_record(design_signal, u, zeros);
        prov.write_for(design_signal);
      }
      out << "designed " << spec.excited_bins.size() << " lines in bins " << spec.band.lo << ".." << spec.band.hi
          << " -> " << design_out.string() << '\n';
      return kExitOk;
    }

    if (sim_cmd->parsed()) {
      const auto spec = io::read_spec(sim_spec);
      WienerSurrogate sys = sim_system.empty() ? WienerSurrogate::default_surrogate() : io::read_surrogate(sim_system);
      if (sim_alpha2) sys.alpha2 = *sim_alpha2;
      if (sim_alpha3) sys.alpha3 = *sim_alpha3;
      if (sim_noise) sys.noise_std = *sim_noise;
      sys.op_point = sim_op;
      sys.validate();
      const auto seed = effective_seed(sim_seed);
      prov.subcommand = "simulate";
      prov.seed = seed;
      prov.inputs.push_back(sim_spec.generic_string());
      if (!sim_system.empty()) prov.inputs.push_back(sim_system.generic_string());
      prov.config = json::parse(io::surrogate_to_json(sys));
      prov.config["periods"] = sim_periods;
      prov.config["initial_state_std"] = sim_state_std;

      if (sim_manifest.empty()) {
        if (sim_periods < 1) throw ConfigError("simulate: --periods must be positive");
        const std::vector<WienerSurrogate> family{sys};
        CampaignOptions options;
        options.initial_state_std = sim_state_std;
        const auto member = make_campaign(family, spec, sim_periods, {}, seed, options).front();
        io::write_record(sim_out, member.input, member.output);
        prov.write_for(sim_out);
        out << "simulated " << member.output.size() << " samples -> " << sim_out.string() << '\n';
        return kExitOk;
      }
      const int count = sim_lengths.empty() ? sim_records : static_cast<int>(sim_lengths.size());
      if (count < 1) throw ConfigError("simulate: --records must be positive");
      const std::vector<WienerSurrogate> family(static_cast<std::size_t>(count), sys);
      CampaignOptions options;
      options.initial_state_std = sim_state_std;
      options.redraw_phases = true;
      const auto members = make_campaign(family, spec, sim_periods, sim_lengths, seed, options);
      io::Manifest manifest;
      const fs::path base = sim_manifest.has_parent_path() ? sim_manifest.parent_path() : fs::path(".");
      const std::string stem = sim_manifest.stem().string();
      prov.config["lengths"] = sim_lengths;
      prov.config["records"] = count;
      for (std::size_t i = 0; i < members.size(); ++i) {
        const fs::path name = stem + "_" + std::to_string(i) + ".csv";
        io::write_record(base / name, members[i].input, members[i].output);
        prov.write_for(base / name);
        manifest.subrecords.push_back(name);
        manifest.operating_points.push_back(members[i].system.op_point);
      }
      io::write_manifest(sim_manifest, manifest);
      prov.write_for(sim_manifest);
      out << "simulated " << members.size() << " sub-records -> " << sim_manifest.string() << '\n';
      return kExitOk;
    }

    if (est_cmd->parsed()) {
      const auto rec = io::read_record(est_in);
      std::optional<MultisineSpec> spec;
      if (!est_spec.empty()) spec = io::read_spec(est_spec);
      const auto [lo, hi] = parse_band(est_band);
      SpectrumRecord U;
      SpectrumRecord Y;
      int discard = 0;
      int scale = 1;
      if (est_frame == "period") {
        discard = default_discard(rec.input, est_discard);
        const auto us = period_spectra(rec.input, discard);
        const auto ys = period_spectra(rec.output, discard);
        U = us.size() > 1 ? period_average(us).mean : us.front();
        Y = ys.size() > 1 ? period_average(ys).mean : ys.front();
      } else {
        U = dft(rec.input);
        Y = dft(rec.output);
        scale = rec.input.n_periods;
      }
      LpmConfig cfg;
      cfg.poly_order = est_R;
      cfg.half_window = est_n.value_or(est_R + 2);
      cfg.band = band_to_bins(lo, hi, rec.input.sample_rate_hz, U.size());
      cfg.estimate_noise_var = cfg.dof() >= 1;
      if (spec) {
        if (spec->samples_per_period != rec.input.samples_per_period) {
          throw ConfigError("estimate: spec period " + std::to_string(spec->samples_per_period) +
                            " differs from the record period " + std::to_string(rec.input.samples_per_period));
        }
        for (int k : spec->excited_bins) {
          if (cfg.band.contains(k * scale)) cfg.lines.push_back(k * scale);
        }
      }
      FrfEstimate est;
      try {
        est = estimate_frf(U, Y, cfg);
      } catch (const NumericalError& e) {
        if (spec) throw;
        throw NumericalError(std::string(e.what()) + "; records with detection lines need --spec");
      }
      io::write_frf(est_out, est);
      prov.subcommand = "estimate";
      prov.inputs.push_back(est_in.generic_string());
      if (spec) prov.inputs.push_back(est_spec.generic_string());
      prov.config = {{"R", cfg.poly_order}, {"n", cfg.half_window}, {"band_hz", {lo, hi}}, {"frame", est_frame},
                     {"discard", discard}, {"noise_var", cfg.estimate_noise_var}};
      prov.write_for(est_out);
      if (!est_transients.empty()) {
        io::write_transients(est_transients, est);
        prov.write_for(est_transients);
      }
      out << "estimated " << est.size() << " lines -> " << est_out.string() << '\n';
      return kExitOk;
    }

    if (cat_cmd->parsed()) {
      const auto ds = io::load_concat_dataset(cat_manifest);
      const auto [lo, hi] = parse_band(cat_band);
      const auto band = band_to_bins(lo, hi, ds.sample_rate_hz, ds.total_length());
      auto cfg = ConcatConfig::defaults(band, ds.n_concat());
      cfg.poly_order = cat_R;
      cfg.half_window = cat_n.value_or((cfg.params(ds.n_concat()) + 3) / 2);
      cfg.estimate_noise_var = !cat_no_noise;
      const auto est = estimate_frf_concat(ds, cfg);
      for (const auto& w : est.warnings) err << "warning: " << w << '\n';
      io::write_frf(cat_out, est);
      prov.subcommand = "estimate-concat";
      prov.inputs.push_back(cat_manifest.generic_string());
      prov.config = {{"R", cfg.poly_order}, {"n", cfg.half_window}, {"band_hz", {lo, hi}},
                     {"n_concat", ds.n_concat()}, {"noise_var", cfg.estimate_noise_var}};
      prov.write_for(cat_out);
      if (!cat_transients.empty()) {
        io::write_transients(cat_transients, est);
        prov.write_for(cat_transients);
      }
      out << "estimated " << est.size() << " lines from " << ds.n_concat() << " sub-records -> " << cat_out.string()
          << '\n';
      return kExitOk;
    }

    if (avg_cmd->parsed()) {
      std::vector<FrfEstimate> estimates;
      for (const auto& p : avg_in) {
        estimates.push_back(io::read_frf(p));
        prov.inputs.push_back(p.generic_string());
      }
      const auto common = average_blas(estimates);
      io::write_common_bla(avg_out, common);
      prov.subcommand = "average";
      prov.config = {{"m_experiments", common.m_experiments}};
      prov.write_for(avg_out);
      out << "averaged " << common.m_experiments << " estimates -> " << avg_out.string() << '\n';
      return kExitOk;
    }

    if (dist_cmd->parsed()) {
      const auto rec = io::read_record(dist_in);
      const auto spec = io::read_spec(dist_spec);
      if (spec.samples_per_period != rec.output.samples_per_period) {
        throw ConfigError("distortions: spec period differs from the record period");
      }
      const int discard = default_discard(rec.output, dist_discard);
      const auto report = analyze_distortions(period_spectra(rec.output, discard), spec);
      io::write_distortion(dist_out, report);
      prov.subcommand = "distortions";
      prov.inputs = {dist_in.generic_string(), dist_spec.generic_string()};
      prov.config = {{"discard", discard}};
      prov.write_for(dist_out);
      out << "odd NL " << io::format_double(report.odd_nl.mean_db()) << " dB, even NL "
          << io::format_double(report.even_nl.mean_db()) << " dB -> " << dist_out.string() << '\n';
      return kExitOk;
    }

    if (fit_cmd->parsed()) {
      const auto est = read_estimate(fit_in);
      const auto data = est.fit_data();
      FitOptions options;
      options.weighting = fit_weighting == "uniform" ? Weighting::uniform : Weighting::variance;
      prov.subcommand = "fit";
      prov.inputs.push_back(fit_in.generic_string());
      RationalModel model;
      if (fit_nb || fit_na) {
        if (!(fit_nb && fit_na)) throw ConfigError("fit: --nb and --na must be given together");
        model = fit_tf(data, *fit_nb, *fit_na, options);
        prov.config = {{"nb", *fit_nb}, {"na", *fit_na}, {"weighting", fit_weighting}};
      } else {
        const auto grid = parse_order_grid(fit_orders, fit_grid);
        const auto sel = select_order(data, grid, options);
        model = sel.best;
        prov.config = {{"grid", grid}, {"weighting", fit_weighting}};
        if (!fit_table.empty()) {
          io::write_order_table(fit_table, sel);
          prov.write_for(fit_table);
        }
      }
      const auto view = est.view();
      const double band_lo = view.freq_hz.empty() ? 0.0 : view.freq_hz.front();
      const double band_hi = view.freq_hz.empty() ? 0.0 : view.freq_hz.back();
      io::write_model(fit_out, model, band_lo, band_hi);
      prov.write_for(fit_out);
      if (!fit_overlay.empty()) {
        io::write_overlay(fit_overlay, data, model);
        prov.write_for(fit_overlay);
      }
      out << "fitted (nb, na) = (" << model.nb() << ", " << model.na() << "), cost " << io::format_double(model.cost)
          << " -> " << fit_out.string() << '\n';
      return kExitOk;
    }

    if (cmp_cmd->parsed()) {
      const auto a = read_estimate(cmp_a).view();
      auto b_est = read_estimate(cmp_b);
      BlaView b = b_est.view();
      if (b_est.frf && a.freq_hz.size() != b.freq_hz.size()) b = view_of(select_lines_at(*b_est.frf, a.freq_hz));
      const auto cmp = compare_blas(a, b);
      io::write_comparison(cmp_out, cmp);
      prov.subcommand = "compare";
      prov.inputs = {cmp_a.generic_string(), cmp_b.generic_string()};
      prov.write_for(cmp_out);
      out << "mean |a-b| " << io::format_double(cmp.mean_abs_difference) << ", mean pooled std "
          << io::format_double(cmp.mean_pooled_std) << " -> " << cmp_out.string() << '\n';
      return kExitOk;
    }

    if (plot_cmd->parsed()) {
      plot::Figure fig;
      prov.subcommand = "plot";
      if (!plot_frf.empty()) {
        fig = plot::frf_figure(read_estimate(plot_frf).view(), plot_frf.stem().string());
        prov.inputs.push_back(plot_frf.generic_string());
      } else if (!plot_dist.empty()) {
        fig = plot::distortion_figure(io::read_distortion(plot_dist));
        prov.inputs.push_back(plot_dist.generic_string());
      } else if (!plot_avg.empty() && !plot_concat.empty()) {
        const auto avg = read_estimate(plot_avg);
        const auto cat = read_estimate(plot_concat);
        const auto avg_view = avg.view();
        BlaView cat_view = cat.view();
        if (cat.frf && cat_view.freq_hz.size() != avg_view.freq_hz.size()) {
          cat_view = view_of(select_lines_at(*cat.frf, avg_view.freq_hz));
        }
        (void)compare_blas(avg_view, cat_view);  // grid check
        std::optional<RationalModel> model;
        if (!plot_model.empty()) model = io::read_model(plot_model);
        fig = plot::compare_figure(avg_view, cat_view, model ? &*model : nullptr, avg.n_lines());
        prov.inputs = {plot_avg.generic_string(), plot_concat.generic_string()};
        if (model) prov.inputs.push_back(plot_model.generic_string());
      } else {
        throw ConfigError("plot: give --frf, --distortion, or --averaged with --concat");
      }
      io::write_text(plot_out, plot::render_svg(fig));
      write_companion_csv(plot_out, fig);
      prov.write_for(plot_out);
      out << "plotted -> " << plot_out.string() << '\n';
      return kExitOk;
    }

    if (bench_cmd->parsed()) {
      if (bench_list->parsed()) {
        for (const auto& id : bench::scenario_ids()) out << id << '\n';
        return kExitOk;
      }
      if (bench_run->parsed()) {
        if (bench_all == !bench_ids.empty()) throw ConfigError("bench run: give exactly one of --all or --id");
        const auto ids = bench_all ? bench::scenario_ids() : bench_ids;
        std::optional<fs::path> artifacts;
        if (!bench_artifacts.empty()) artifacts = bench_artifacts;
        std::vector<bench::ScenarioResult> results;
        bool all_pass = true;
        for (const auto& id : ids) {
          results.push_back(bench::run_scenario(id, artifacts));
          const auto& r = results.back();
          all_pass = all_pass && r.pass;
          out << (r.pass ? "PASS " : "FAIL ") << id << '\n';
          for (const auto& f : r.failed_checks) out << "  " << f << '\n';
        }
        io::write_text(bench_report, bench::report_csv(results));
        return all_pass ? kExitOk : kExitNumerical;
      }
    }
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace blalab::cli
