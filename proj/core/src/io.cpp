// SPDX-License-Identifier: Apache-2.0
#include "blalab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string_view>

namespace blalab::io {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string located(const fs::path& file, int line, const std::string& what) {
  std::string out = file.string();
  if (line > 0) out += ":" + std::to_string(line);
  return out + ": " + what;
}

double db(double magnitude) { return 20.0 * std::log10(magnitude); }

// Minimal CSV reader for the numeric formats below. Fields never contain commas.
struct CsvRow {
  int line = 0;
  std::vector<std::string> fields;
};

struct CsvTable {
  fs::path file;
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw FormatError(file, 1, "missing column '" + name + "'");
  }
};

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

CsvTable read_csv(const fs::path& file) {
  const std::string text = read_text(file);
  CsvTable table;
  table.file = file;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (table.header.empty()) {
      table.header = split(line);
      continue;
    }
    CsvRow row{line_no, split(line)};
    if (row.fields.size() != table.header.size()) {
      throw FormatError(file, line_no,
                        "expected " + std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(row.fields.size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw FormatError(file, 0, "empty file");
  return table;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected) {
  if (table.header.size() < expected.size() ||
      !std::equal(expected.begin(), expected.end(), table.header.begin())) {
    std::string names;
    for (const auto& e : expected) names += (names.empty() ? "" : ",") + e;
    throw FormatError(table.file, 1, "header must start with " + names);
  }
}

double parse_double(const CsvTable& table, const CsvRow& row, std::size_t col) {
  const std::string& field = row.fields[col];
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw FormatError(table.file, row.line, "column '" + table.header[col] + "': '" + field + "' is not a number");
  }
  return value;
}

int parse_int(const CsvTable& table, const CsvRow& row, std::size_t col) {
  const std::string& field = row.fields[col];
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw FormatError(table.file, row.line, "column '" + table.header[col] + "': '" + field + "' is not an integer");
  }
  return value;
}

json parse_json(const std::string& text, const fs::path& file) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    throw FormatError(file, 0, std::string("invalid JSON: ") + err.what());
  }
}

template <class T>
T field(const json& j, const char* key, const fs::path& file) {
  if (!j.contains(key)) throw FormatError(file, 0, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& err) {
    throw FormatError(file, 0, std::string("key '") + key + "': " + err.what());
  }
}

json op_to_json(const OperatingPoint& op) {
  return json{{"soc_pct", op.soc_pct}, {"temperature_c", op.temperature_c}, {"rms_a", op.rms_a}, {"label", op.label}};
}

OperatingPoint op_from_json(const json& j, const fs::path& file) {
  OperatingPoint op;
  op.soc_pct = field<double>(j, "soc_pct", file);
  op.temperature_c = field<double>(j, "temperature_c", file);
  op.rms_a = field<double>(j, "rms_a", file);
  op.label = field<std::string>(j, "label", file);
  return op;
}

json read_json_file(const fs::path& path) { return parse_json(read_text(path), path); }

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& header) { out_ << header << '\n'; }

  CsvWriter& operator<<(double v) { return put(format_double(v)); }
  CsvWriter& operator<<(int v) { return put(std::to_string(v)); }
  CsvWriter& operator<<(const std::string& v) { return put(v); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }
  void save(const fs::path& path) const { write_text(path, out_.str()); }

 private:
  CsvWriter& put(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  std::ostringstream out_;
  bool first_ = true;
};

json config_to_json(const LpmConfig& c) {
  return json{{"poly_order", c.poly_order},
              {"half_window", c.half_window},
              {"band_lo", c.band.lo},
              {"band_hi", c.band.hi},
              {"lines", c.lines},
              {"estimate_noise_var", c.estimate_noise_var}};
}

LpmConfig config_from_json(const json& j, const fs::path& file) {
  LpmConfig c;
  c.poly_order = field<int>(j, "poly_order", file);
  c.half_window = field<int>(j, "half_window", file);
  c.band.lo = field<int>(j, "band_lo", file);
  c.band.hi = field<int>(j, "band_hi", file);
  c.lines = field<std::vector<int>>(j, "lines", file);
  c.estimate_noise_var = field<bool>(j, "estimate_noise_var", file);
  return c;
}

json ops_to_json(const std::vector<OperatingPoint>& ops) {
  json arr = json::array();
  for (const auto& op : ops) arr.push_back(op_to_json(op));
  return arr;
}

std::vector<OperatingPoint> ops_from_json(const json& j, const fs::path& file) {
  std::vector<OperatingPoint> out;
  if (!j.is_array()) throw FormatError(file, 0, "expected an array of operating points");
  for (const auto& e : j) out.push_back(op_from_json(e, file));
  return out;
}

void check_kind(const json& meta, const std::string& kind, const fs::path& file) {
  if (field<std::string>(meta, "kind", file) != kind) throw FormatError(file, 0, "sidecar is not of kind '" + kind + "'");
}

}  // namespace

FormatError::FormatError(const fs::path& file, int line, const std::string& what)
    : ConfigError(located(file, line, what)), line_(line) {}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  return p.replace_extension(".meta.json");
}

fs::path provenance_path(const fs::path& artifact) {
  fs::path p = artifact;
  return p += ".provenance.json";
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

// Records ------------------------------------------------------------------

void write_record(const fs::path& csv, const SignalRecord& input, const SignalRecord& output) {
  input.validate();
  if (output.size() != input.size()) throw ConfigError("record: input and output lengths differ");
  CsvWriter w("time_s,input,output");
  for (std::size_t t = 0; t < input.size(); ++t) {
    w << static_cast<double>(t) / input.sample_rate_hz << input.samples[t] << output.samples[t];
    w.end_row();
  }
  w.save(csv);
  json meta = op_to_json(input.meta);
  meta["sample_rate_hz"] = input.sample_rate_hz;
  meta["samples_per_period"] = input.samples_per_period;
  meta["n_periods"] = input.n_periods;
  write_json_file(sidecar_path(csv), meta);
}

RecordFile read_record(const fs::path& csv) {
  const fs::path sidecar = sidecar_path(csv);
  const json meta = read_json_file(sidecar);
  RecordFile rec;
  rec.input.sample_rate_hz = field<double>(meta, "sample_rate_hz", sidecar);
  rec.input.samples_per_period = field<int>(meta, "samples_per_period", sidecar);
  rec.input.n_periods = field<int>(meta, "n_periods", sidecar);
  rec.input.meta = op_from_json(meta, sidecar);
  if (!(rec.input.sample_rate_hz > 0.0)) throw FormatError(sidecar, 0, "sample_rate_hz must be positive");

  const CsvTable table = read_csv(csv);
  require_header(table, {"time_s", "input", "output"});
  const double step = 1.0 / rec.input.sample_rate_hz;
  double previous = 0.0;
  rec.input.samples.reserve(table.rows.size());
  rec.output = rec.input;
  rec.output.samples.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const double t = parse_double(table, row, 0);
    if (i > 0 && !(t > previous && std::abs((t - previous) - step) <= 1e-9)) {
      throw FormatError(csv, row.line, "time_s must increase in steps of 1/sample_rate_hz");
    }
    previous = t;
    rec.input.samples.push_back(parse_double(table, row, 1));
    rec.output.samples.push_back(parse_double(table, row, 2));
  }
  const auto expected = static_cast<std::size_t>(rec.input.samples_per_period) * static_cast<std::size_t>(rec.input.n_periods);
  if (rec.input.samples_per_period < 1 || rec.input.n_periods < 1 || table.rows.size() != expected) {
    throw FormatError(csv, 0,
                      "record has " + std::to_string(table.rows.size()) + " rows but metadata declares " +
                          std::to_string(rec.input.samples_per_period) + " x " + std::to_string(rec.input.n_periods));
  }
  rec.input.validate();
  return rec;
}

// Spec -----------------------------------------------------------------------

std::string spec_to_json(const MultisineSpec& spec) {
  const json j{{"sample_rate_hz", spec.sample_rate_hz},
               {"samples_per_period", spec.samples_per_period},
               {"band_lo", spec.band.lo},
               {"band_hi", spec.band.hi},
               {"grid_kind", to_string(spec.grid_kind)},
               {"detection_group_size", spec.detection_group_size},
               {"rms_target", spec.rms_target},
               {"seed", spec.seed},
               {"excited_bins", spec.excited_bins},
               {"amplitudes", spec.amplitudes},
               {"phases", spec.phases}};
  return j.dump(2) + "\n";
}

MultisineSpec spec_from_json(const std::string& text) {
  const fs::path src("<spec>");
  const json j = parse_json(text, src);
  MultisineSpec spec;
  spec.sample_rate_hz = field<double>(j, "sample_rate_hz", src);
  spec.samples_per_period = field<int>(j, "samples_per_period", src);
  spec.band.lo = field<int>(j, "band_lo", src);
  spec.band.hi = field<int>(j, "band_hi", src);
  spec.grid_kind = grid_kind_from_string(field<std::string>(j, "grid_kind", src));
  spec.detection_group_size = field<int>(j, "detection_group_size", src);
  spec.rms_target = field<double>(j, "rms_target", src);
  spec.seed = field<std::uint64_t>(j, "seed", src);
  spec.excited_bins = field<std::vector<int>>(j, "excited_bins", src);
  spec.amplitudes = field<std::vector<double>>(j, "amplitudes", src);
  spec.phases = field<std::vector<double>>(j, "phases", src);
  spec.validate();
  return spec;
}

void write_spec(const fs::path& path, const MultisineSpec& spec) { write_text(path, spec_to_json(spec)); }

MultisineSpec read_spec(const fs::path& path) {
  try {
    return spec_from_json(read_text(path));
  } catch (const FormatError& err) {
    throw FormatError(path, 0, err.what());
  }
}

// Surrogate ------------------------------------------------------------------

std::string surrogate_to_json(const WienerSurrogate& system) {
  json j{{"b", system.linear.b},
         {"a", system.linear.a},
         {"alpha2", system.alpha2},
         {"alpha3", system.alpha3},
         {"noise_std", system.noise_std},
         {"noise_pole", nullptr},
         {"initial_state", system.initial_state},
         {"op_point", op_to_json(system.op_point)}};
  if (system.noise_pole) j["noise_pole"] = *system.noise_pole;
  return j.dump(2) + "\n";
}

WienerSurrogate surrogate_from_json(const std::string& text) {
  const fs::path src("<surrogate>");
  const json j = parse_json(text, src);
  WienerSurrogate sys;
  sys.linear.b = field<std::vector<double>>(j, "b", src);
  sys.linear.a = field<std::vector<double>>(j, "a", src);
  sys.alpha2 = field<double>(j, "alpha2", src);
  sys.alpha3 = field<double>(j, "alpha3", src);
  sys.noise_std = field<double>(j, "noise_std", src);
  if (j.contains("noise_pole") && !j.at("noise_pole").is_null()) sys.noise_pole = field<double>(j, "noise_pole", src);
  sys.initial_state = field<std::vector<double>>(j, "initial_state", src);
  if (j.contains("op_point")) sys.op_point = op_from_json(j.at("op_point"), src);
  sys.validate();
  return sys;
}

void write_surrogate(const fs::path& path, const WienerSurrogate& system) {
  write_text(path, surrogate_to_json(system));
}

WienerSurrogate read_surrogate(const fs::path& path) {
  try {
    return surrogate_from_json(read_text(path));
  } catch (const FormatError& err) {
    throw FormatError(path, 0, err.what());
  }
}

// Spectra and estimates ------------------------------------------------------

void write_spectrum(const fs::path& csv, const SpectrumRecord& spectrum) {
  CsvWriter w("bin,freq_hz,re,im");
  for (int k = 0; k < spectrum.size(); ++k) {
    w << k << spectrum.freq_hz(k) << spectrum[k].real() << spectrum[k].imag();
    w.end_row();
  }
  w.save(csv);
}

void write_frf(const fs::path& csv, const FrfEstimate& estimate) {
  estimate.validate();
  std::string header = "bin,freq_hz,g_re,g_im,g_mag_db,noise_var,g_var,dof,t_re,t_im";
  for (std::size_t m = 0; m < estimate.splice_transients.size(); ++m) {
    header += ",s" + std::to_string(m) + "_re,s" + std::to_string(m) + "_im";
  }
  CsvWriter w(header);
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    w << estimate.bins[i] << estimate.freq_hz(i) << estimate.g_bla[i].real() << estimate.g_bla[i].imag()
      << db(std::abs(estimate.g_bla[i])) << estimate.noise_var[i] << estimate.g_var[i] << estimate.dof[i]
      << estimate.transient[i].real() << estimate.transient[i].imag();
    for (const auto& block : estimate.splice_transients) w << block[i].real() << block[i].imag();
    w.end_row();
  }
  w.save(csv);
  const json meta{{"kind", "frf"},
                  {"sample_rate_hz", estimate.sample_rate_hz},
                  {"n_lines", estimate.n_lines},
                  {"n_splices", estimate.splice_transients.size()},
                  {"config", config_to_json(estimate.config)},
                  {"members", ops_to_json(estimate.members)},
                  {"warnings", estimate.warnings}};
  write_json_file(sidecar_path(csv), meta);
}

FrfEstimate read_frf(const fs::path& csv) {
  const fs::path sidecar = sidecar_path(csv);
  const json meta = read_json_file(sidecar);
  check_kind(meta, "frf", sidecar);
  FrfEstimate est;
  est.sample_rate_hz = field<double>(meta, "sample_rate_hz", sidecar);
  est.n_lines = field<int>(meta, "n_lines", sidecar);
  est.config = config_from_json(meta.at("config"), sidecar);
  est.members = ops_from_json(meta.at("members"), sidecar);
  est.warnings = field<std::vector<std::string>>(meta, "warnings", sidecar);
  const auto n_splices = field<std::size_t>(meta, "n_splices", sidecar);

  const CsvTable table = read_csv(csv);
  require_header(table, {"bin", "freq_hz", "g_re", "g_im", "g_mag_db", "noise_var", "g_var", "dof", "t_re", "t_im"});
  if (table.header.size() != 10 + 2 * n_splices) throw FormatError(csv, 1, "splice transient columns do not match the sidecar");
  est.splice_transients.assign(n_splices, {});
  for (const auto& row : table.rows) {
    est.bins.push_back(parse_int(table, row, 0));
    est.g_bla.emplace_back(parse_double(table, row, 2), parse_double(table, row, 3));
    est.noise_var.push_back(parse_double(table, row, 5));
    est.g_var.push_back(parse_double(table, row, 6));
    est.dof.push_back(parse_int(table, row, 7));
    est.transient.emplace_back(parse_double(table, row, 8), parse_double(table, row, 9));
    for (std::size_t m = 0; m < n_splices; ++m) {
      est.splice_transients[m].emplace_back(parse_double(table, row, 10 + 2 * m), parse_double(table, row, 11 + 2 * m));
    }
  }
  est.validate();
  return est;
}

void write_transients(const fs::path& csv, const FrfEstimate& estimate) {
  CsvWriter w("bin,freq_hz,block,t_re,t_im");
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    if (estimate.splice_transients.empty()) {
      w << estimate.bins[i] << estimate.freq_hz(i) << 0 << estimate.transient[i].real() << estimate.transient[i].imag();
      w.end_row();
      continue;
    }
    for (std::size_t m = 0; m < estimate.splice_transients.size(); ++m) {
      const Complex t = estimate.splice_transients[m][i];
      w << estimate.bins[i] << estimate.freq_hz(i) << static_cast<int>(m) << t.real() << t.imag();
      w.end_row();
    }
  }
  w.save(csv);
}

void write_common_bla(const fs::path& csv, const CommonBla& common) {
  CsvWriter w("bin,freq_hz,c_re,c_im,mag_db,sample_var");
  for (std::size_t i = 0; i < common.size(); ++i) {
    w << common.bins[i] << common.freq_hz(i) << common.c_bla[i].real() << common.c_bla[i].imag()
      << db(std::abs(common.c_bla[i])) << common.sample_var[i];
    w.end_row();
  }
  w.save(csv);
  const json meta{{"kind", "common_bla"},
                  {"sample_rate_hz", common.sample_rate_hz},
                  {"n_lines", common.n_lines},
                  {"m_experiments", common.m_experiments},
                  {"members", ops_to_json(common.member_meta)}};
  write_json_file(sidecar_path(csv), meta);
}

CommonBla read_common_bla(const fs::path& csv) {
  const fs::path sidecar = sidecar_path(csv);
  const json meta = read_json_file(sidecar);
  check_kind(meta, "common_bla", sidecar);
  CommonBla common;
  common.sample_rate_hz = field<double>(meta, "sample_rate_hz", sidecar);
  common.n_lines = field<int>(meta, "n_lines", sidecar);
  common.m_experiments = field<int>(meta, "m_experiments", sidecar);
  common.member_meta = ops_from_json(meta.at("members"), sidecar);
  const CsvTable table = read_csv(csv);
  require_header(table, {"bin", "freq_hz", "c_re", "c_im", "mag_db", "sample_var"});
  for (const auto& row : table.rows) {
    common.bins.push_back(parse_int(table, row, 0));
    common.c_bla.emplace_back(parse_double(table, row, 2), parse_double(table, row, 3));
    common.sample_var.push_back(parse_double(table, row, 5));
  }
  return common;
}

EstimateKind detect_estimate_kind(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw ConfigError("cannot open " + csv.string());
  std::string header;
  std::getline(in, header);
  const auto cols = split(header);
  if (cols.size() > 2 && cols[2] == "g_re") return EstimateKind::frf;
  if (cols.size() > 2 && cols[2] == "c_re") return EstimateKind::common_bla;
  throw FormatError(csv, 1, "not an FRF or common-BLA file");
}

// Distortion -----------------------------------------------------------------

void write_distortion(const fs::path& csv, const DistortionReport& report) {
  struct Entry {
    int bin;
    int order;
    std::string cls;
    double level;
  };
  std::vector<Entry> entries;
  auto add = [&](const LineLevels& levels, int order, const char* cls) {
    for (std::size_t i = 0; i < levels.bins.size(); ++i) entries.push_back({levels.bins[i], order, cls, levels.level_db[i]});
  };
  add(report.excited, 0, "E");
  add(report.odd_nl, 1, "O");
  add(report.even_nl, 2, "V");
  add(report.noise_floor, 3, "N");
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& x, const Entry& y) { return x.bin != y.bin ? x.bin < y.bin : x.order < y.order; });
  CsvWriter w("bin,freq_hz,class,level_db");
  for (const auto& e : entries) {
    w << e.bin << e.bin * report.sample_rate_hz / report.n_lines << e.cls << e.level;
    w.end_row();
  }
  w.save(csv);
  const json meta{{"kind", "distortion"},
                  {"sample_rate_hz", report.sample_rate_hz},
                  {"n_lines", report.n_lines},
                  {"n_periods", report.n_periods},
                  {"op_point", op_to_json(report.meta)}};
  write_json_file(sidecar_path(csv), meta);
}

DistortionReport read_distortion(const fs::path& csv) {
  const fs::path sidecar = sidecar_path(csv);
  const json meta = read_json_file(sidecar);
  check_kind(meta, "distortion", sidecar);
  DistortionReport report;
  report.sample_rate_hz = field<double>(meta, "sample_rate_hz", sidecar);
  report.n_lines = field<int>(meta, "n_lines", sidecar);
  report.n_periods = field<int>(meta, "n_periods", sidecar);
  report.meta = op_from_json(meta.at("op_point"), sidecar);
  const CsvTable table = read_csv(csv);
  require_header(table, {"bin", "freq_hz", "class", "level_db"});
  for (const auto& row : table.rows) {
    const int bin = parse_int(table, row, 0);
    const double level = parse_double(table, row, 3);
    const std::string& cls = row.fields[2];
    LineLevels* target = cls == "E"   ? &report.excited
                         : cls == "O" ? &report.odd_nl
                         : cls == "V" ? &report.even_nl
                         : cls == "N" ? &report.noise_floor
                                      : nullptr;
    if (!target) throw FormatError(csv, row.line, "unknown line class '" + cls + "'");
    target->bins.push_back(bin);
    target->level_db.push_back(level);
  }
  return report;
}

void write_comparison(const fs::path& csv, const BlaComparison& comparison) {
  CsvWriter w("bin,freq_hz,diff_re,diff_im,gap_db,pooled_std");
  for (std::size_t i = 0; i < comparison.bins.size(); ++i) {
    w << comparison.bins[i] << comparison.freq_hz[i] << comparison.difference[i].real()
      << comparison.difference[i].imag() << comparison.gap_db[i] << comparison.pooled_std[i];
    w.end_row();
  }
  w.save(csv);
  const json meta{{"kind", "comparison"},
                  {"max_gap_db", comparison.max_gap_db},
                  {"mean_gap_db", comparison.mean_gap_db},
                  {"mean_abs_difference", comparison.mean_abs_difference},
                  {"mean_pooled_std", comparison.mean_pooled_std},
                  {"variance_ratio", comparison.variance_ratio},
                  {"fraction_b_var_ge_a", comparison.fraction_b_var_ge_a}};
  write_json_file(sidecar_path(csv), meta);
}

// Models ---------------------------------------------------------------------

std::string model_to_json(const RationalModel& model, double band_lo_hz, double band_hi_hz) {
  const json j{{"b", model.b},
               {"a", model.a},
               {"cost", model.cost},
               {"mdl", model.mdl},
               {"n_freqs_used", model.n_freqs_used},
               {"band", {band_lo_hz, band_hi_hz}}};
  return j.dump(2) + "\n";
}

RationalModel model_from_json(const std::string& text) {
  const fs::path src("<model>");
  const json j = parse_json(text, src);
  RationalModel m;
  m.b = field<std::vector<double>>(j, "b", src);
  m.a = field<std::vector<double>>(j, "a", src);
  m.cost = field<double>(j, "cost", src);
  m.mdl = field<double>(j, "mdl", src);
  m.n_freqs_used = field<int>(j, "n_freqs_used", src);
  m.validate();
  return m;
}

void write_model(const fs::path& path, const RationalModel& model, double band_lo_hz, double band_hi_hz) {
  write_text(path, model_to_json(model, band_lo_hz, band_hi_hz));
}

RationalModel read_model(const fs::path& path) {
  try {
    return model_from_json(read_text(path));
  } catch (const FormatError& err) {
    throw FormatError(path, 0, err.what());
  }
}

void write_overlay(const fs::path& csv, const FitData& data, const RationalModel& model) {
  CsvWriter w("bin,freq_hz,meas_re,meas_im,model_re,model_im,meas_db,model_db");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Complex g = model.response(data.theta[i]);
    const int bin = data.bins.empty() ? static_cast<int>(i) : data.bins[i];
    const double f = data.n_lines > 0 ? bin * data.sample_rate_hz / data.n_lines
                                      : data.theta[i] * data.sample_rate_hz / (2.0 * 3.14159265358979323846);
    w << bin << f << data.g[i].real() << data.g[i].imag() << g.real() << g.imag() << db(std::abs(data.g[i]))
      << db(std::abs(g));
    w.end_row();
  }
  w.save(csv);
}

void write_order_table(const fs::path& csv, const OrderSelection& selection) {
  CsvWriter w("nb,na,cost,mdl,ok");
  for (const auto& row : selection.table) {
    w << row.nb << row.na << row.cost << row.mdl << (row.ok ? 1 : 0);
    w.end_row();
  }
  w.save(csv);
}

// Manifests ------------------------------------------------------------------

void write_manifest(const fs::path& path, const Manifest& manifest) {
  if (manifest.operating_points.size() != manifest.subrecords.size()) {
    throw ConfigError("manifest: one operating point per sub-record is required");
  }
  json arr = json::array();
  for (std::size_t i = 0; i < manifest.subrecords.size(); ++i) {
    arr.push_back(json{{"path", manifest.subrecords[i].generic_string()},
                       {"operating_point", op_to_json(manifest.operating_points[i])}});
  }
  write_json_file(path, json{{"subrecords", arr}});
}

Manifest read_manifest(const fs::path& path) {
  const json j = read_json_file(path);
  if (!j.contains("subrecords") || !j.at("subrecords").is_array()) {
    throw FormatError(path, 0, "manifest needs a 'subrecords' array");
  }
  Manifest m;
  for (const auto& e : j.at("subrecords")) {
    m.subrecords.emplace_back(field<std::string>(e, "path", path));
    m.operating_points.push_back(e.contains("operating_point") ? op_from_json(e.at("operating_point"), path)
                                                               : OperatingPoint{});
  }
  if (m.subrecords.empty()) throw FormatError(path, 0, "manifest lists no sub-records");
  return m;
}

ConcatDataset load_concat_dataset(const fs::path& manifest_path) {
  const Manifest manifest = read_manifest(manifest_path);
  const fs::path base = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
  ConcatDataset data;
  for (std::size_t i = 0; i < manifest.subrecords.size(); ++i) {
    const fs::path p = manifest.subrecords[i].is_absolute() ? manifest.subrecords[i] : base / manifest.subrecords[i];
    RecordFile rec = read_record(p);
    if (i == 0) {
      data.sample_rate_hz = rec.input.sample_rate_hz;
    } else if (rec.input.sample_rate_hz != data.sample_rate_hz) {
      throw FormatError(p, 0, "sample rate differs from the first sub-record");
    }
    data.subrecords.push_back(Subrecord{std::move(rec.input.samples), std::move(rec.output.samples),
                                        manifest.operating_points[i]});
  }
  data.validate();
  return data;
}

}  // namespace blalab::io
