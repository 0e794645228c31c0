// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "blalab/bla_aggregate.hpp"
#include "blalab/concat_lpm.hpp"
#include "blalab/distortion.hpp"
#include "blalab/parametric_fit.hpp"
#include "blalab/simulator.hpp"

namespace blalab::io {

/// Malformed or inconsistent file. `line()` is the 1-based CSV line, 0 when
/// the problem is not tied to a line.
class FormatError : public ConfigError {
 public:
  FormatError(const std::filesystem::path& file, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// `rec.csv` -> `rec.meta.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);
/// `out.csv` -> `out.csv.provenance.json`.
std::filesystem::path provenance_path(const std::filesystem::path& artifact);

// Records: CSV `time_s,input,output` plus a metadata sidecar.
struct RecordFile {
  SignalRecord input;
  SignalRecord output;
};

void write_record(const std::filesystem::path& csv, const SignalRecord& input, const SignalRecord& output);
RecordFile read_record(const std::filesystem::path& csv);

// Multisine spec JSON.
std::string spec_to_json(const MultisineSpec& spec);
MultisineSpec spec_from_json(const std::string& text);
void write_spec(const std::filesystem::path& path, const MultisineSpec& spec);
MultisineSpec read_spec(const std::filesystem::path& path);

// Surrogate JSON.
std::string surrogate_to_json(const WienerSurrogate& system);
WienerSurrogate surrogate_from_json(const std::string& text);
void write_surrogate(const std::filesystem::path& path, const WienerSurrogate& system);
WienerSurrogate read_surrogate(const std::filesystem::path& path);

// Spectrum CSV `bin,freq_hz,re,im`.
void write_spectrum(const std::filesystem::path& csv, const SpectrumRecord& spectrum);

// FRF CSV `bin,freq_hz,g_re,g_im,g_mag_db,noise_var,g_var,dof,t_re,t_im`, then one
// `s<m>_re,s<m>_im` pair per splice transient, plus a metadata sidecar.
void write_frf(const std::filesystem::path& csv, const FrfEstimate& estimate);
FrfEstimate read_frf(const std::filesystem::path& csv);

// Per-splice transients `bin,freq_hz,block,t_re,t_im`.
void write_transients(const std::filesystem::path& csv, const FrfEstimate& estimate);

// Common BLA CSV `bin,freq_hz,c_re,c_im,mag_db,sample_var` plus sidecar.
void write_common_bla(const std::filesystem::path& csv, const CommonBla& common);
CommonBla read_common_bla(const std::filesystem::path& csv);

enum class EstimateKind { frf, common_bla };
/// Detects the estimate kind from the CSV header.
EstimateKind detect_estimate_kind(const std::filesystem::path& csv);

// Distortion CSV `bin,freq_hz,class,level_db` with class in {E,O,V,N}.
void write_distortion(const std::filesystem::path& csv, const DistortionReport& report);
DistortionReport read_distortion(const std::filesystem::path& csv);

// Comparison CSV `bin,freq_hz,diff_re,diff_im,gap_db,pooled_std`.
void write_comparison(const std::filesystem::path& csv, const BlaComparison& comparison);

// Model JSON {b, a, cost, mdl, n_freqs_used, band}.
std::string model_to_json(const RationalModel& model, double band_lo_hz, double band_hi_hz);
RationalModel model_from_json(const std::string& text);
void write_model(const std::filesystem::path& path, const RationalModel& model, double band_lo_hz,
                 double band_hi_hz);
RationalModel read_model(const std::filesystem::path& path);

// FRF overlay `bin,freq_hz,meas_re,meas_im,model_re,model_im,meas_db,model_db`.
void write_overlay(const std::filesystem::path& csv, const FitData& data, const RationalModel& model);

// Order table `nb,na,cost,mdl,ok`.
void write_order_table(const std::filesystem::path& csv, const OrderSelection& selection);

/// Manifest JSON listing sub-record CSVs in concatenation order. Relative
/// paths resolve against the manifest's directory.
struct Manifest {
  std::vector<std::filesystem::path> subrecords;
  std::vector<OperatingPoint> operating_points;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);
ConcatDataset load_concat_dataset(const std::filesystem::path& manifest_path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace blalab::io
