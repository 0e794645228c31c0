// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blalab::bench {

/// One row of the threshold table: `metric op value`.
struct Threshold {
  std::string scenario;
  std::string metric;
  std::string op;  // one of <, <=, >, >=, ==
  double value = 0.0;

  bool satisfied_by(double measured) const;
};

struct ThresholdTable {
  std::string version;
  std::vector<Threshold> rows;

  std::vector<Threshold> for_scenario(const std::string& id) const;
};

/// The table embedded from core/data/scenario_thresholds.json.
const ThresholdTable& thresholds();

struct ScenarioResult {
  std::string scenario_id;
  std::map<std::string, double> metrics;
  bool pass = false;
  std::vector<std::string> failed_checks;
  std::string config_json;
};

/// Scenario ids in report order.
std::vector<std::string> scenario_ids();

/// Pure function of the metrics and the threshold table.
bool evaluate(const std::string& id, const std::map<std::string, double>& metrics,
              std::vector<std::string>* failed = nullptr);

/// Runs one scenario with its pinned seeds. When `artifacts` is set the
/// scenario's data products are written below that directory.
ScenarioResult run_scenario(const std::string& id,
                            const std::optional<std::filesystem::path>& artifacts = std::nullopt);

/// CSV report: scenario,metric,value,pass.
std::string report_csv(const std::vector<ScenarioResult>& results);

}  // namespace blalab::bench
