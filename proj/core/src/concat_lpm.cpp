// SPDX-License-Identifier: Apache-2.0
#include "blalab/concat_lpm.hpp"

#include <algorithm>

#include "blalab/errors.hpp"

namespace blalab {

std::vector<int> ConcatDataset::splice_indices() const {
  std::vector<int> out;
  int offset = 0;
  for (const auto& s : subrecords) {
    out.push_back(offset);
    offset += static_cast<int>(s.u.size());
  }
  return out;
}

int ConcatDataset::total_length() const {
  int total = 0;
  for (const auto& s : subrecords) total += static_cast<int>(s.u.size());
  return total;
}

void ConcatDataset::validate() const {
  if (subrecords.empty()) throw ConfigError("concat: dataset has no sub-records");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("concat: sample_rate_hz must be positive");
  for (std::size_t i = 0; i < subrecords.size(); ++i) {
    const auto& s = subrecords[i];
    if (s.u.empty()) throw ConfigError("concat: sub-record " + std::to_string(i) + " has zero length");
    if (s.u.size() != s.y.size()) {
      throw ConfigError("concat: sub-record " + std::to_string(i) + " input and output lengths differ");
    }
    s.meta.validate();
  }
}

ConcatConfig ConcatConfig::defaults(BinRange band, int n_concat) {
  ConcatConfig config;
  config.poly_order = 2;
  const int params = (config.poly_order + 1) * (1 + n_concat);
  config.half_window = (params + 2 + 1) / 2;  // ceil((params + 2) / 2)
  config.band = band;
  config.estimate_noise_var = true;
  return config;
}

void ConcatConfig::validate(int n_concat) const {
  if (poly_order < 1) throw ConfigError("concat: polynomial order R must be at least 1");
  if (n_concat < 1) throw ConfigError("concat: need at least one sub-record");
  if (band.lo < 1 || band.count() < 1) throw ConfigError("concat: band must be non-empty and exclude bin 0");
  const int needed = params(n_concat);
  const std::string relation = "2n+1 = " + std::to_string(rows()) + ", (R+1)(1+N_c) = " + std::to_string(needed);
  if (rows() < needed) {
    throw ConfigError("concat: window too small, 2n+1 >= (R+1)(1+N_c) is violated (" + relation + ")");
  }
  if (estimate_noise_var && rows() == needed) {
    throw ConfigError("concat: noise variance requires 2n+1 > (R+1)(1+N_c) (" + relation + ")");
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!band.contains(lines[i])) throw ConfigError("concat: line " + std::to_string(lines[i]) + " outside band");
    if (i > 0 && lines[i] <= lines[i - 1]) throw ConfigError("concat: lines must be strictly increasing");
  }
  const auto available = lines.empty() ? band.count() : static_cast<int>(lines.size());
  if (available < rows()) throw ConfigError("concat: band holds fewer lines than the window width");
}

ConcatSpectra concat_and_transform(const ConcatDataset& dataset) {
  dataset.validate();
  std::vector<double> u;
  std::vector<double> y;
  u.reserve(static_cast<std::size_t>(dataset.total_length()));
  y.reserve(u.capacity());
  for (const auto& s : dataset.subrecords) {
    u.insert(u.end(), s.u.begin(), s.u.end());
    y.insert(y.end(), s.y.begin(), s.y.end());
  }
  ConcatSpectra out;
  out.total_length = static_cast<int>(u.size());
  out.input = dft(u, dataset.sample_rate_hz, dataset.subrecords.front().meta);
  out.output = dft(y, dataset.sample_rate_hz, dataset.subrecords.front().meta);
  return out;
}

Eigen::MatrixXcd build_concat_regressor(const SpectrumRecord& input, const LocalWindow& window,
                                        std::span<const int> splice_indices, int total_length, int poly_order) {
  if (splice_indices.empty() || splice_indices.front() != 0) {
    throw ConfigError("concat: splice indices must start at 0");
  }
  for (std::size_t i = 1; i < splice_indices.size(); ++i) {
    if (splice_indices[i] <= splice_indices[i - 1]) throw ConfigError("concat: splice indices must increase");
  }
  return detail::build_regressor(input, window, poly_order, splice_indices, total_length);
}

FrfEstimate estimate_frf_concat(const ConcatDataset& dataset, const ConcatConfig& config) {
  dataset.validate();
  config.validate(dataset.n_concat());
  const auto spectra = concat_and_transform(dataset);
  if (config.band.hi >= spectra.total_length) throw ConfigError("concat: band exceeds the spectrum length");

  std::vector<int> lines = config.lines;
  if (lines.empty()) {
    for (int k = config.band.lo; k <= config.band.hi; ++k) lines.push_back(k);
  }
  const auto splices = dataset.splice_indices();
  auto est = detail::estimate_with_transients(spectra.input, spectra.output, lines, config.poly_order,
                                              config.half_window, splices, spectra.total_length);
  est.config.poly_order = config.poly_order;
  est.config.half_window = config.half_window;
  est.config.band = config.band;
  est.config.lines = config.lines;
  est.config.estimate_noise_var = config.estimate_noise_var;
  for (const auto& s : dataset.subrecords) est.members.push_back(s.meta);

  const auto& first = dataset.subrecords.front().meta;
  const bool mixed = std::any_of(dataset.subrecords.begin(), dataset.subrecords.end(), [&](const Subrecord& s) {
    return s.meta.soc_pct != first.soc_pct || s.meta.temperature_c != first.temperature_c ||
           s.meta.rms_a != first.rms_a;
  });
  if (mixed) {
    est.warnings.push_back(
        "sub-records come from different operating points; the estimate is a common BLA that assumes equal "
        "nonlinear distortion levels");
  }
  return est;
}

}  // namespace blalab
