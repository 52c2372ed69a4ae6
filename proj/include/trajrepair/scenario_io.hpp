#pragma once

#include "trajrepair/cspace.hpp"
#include "trajrepair/repair.hpp"
#include "trajrepair/search.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace trajrepair {

inline constexpr int kSchemaVersion = 1;

struct ObstacleEntry {
  ObstaclePrediction prediction;
  bool inflated = false;  // false: the scenario inflation is added on load
};

struct Scenario {
  std::string name;
  std::string description;
  RepairProblem problem;  // obstacles already inflated
  std::vector<ObstacleEntry> obstacle_entries;
  InflationConfig inflation;
  std::optional<double> kappa_max_override;
  SearchConfig search;
  double fit_residual = 0.0;  // RMS of the reference fit, 0 for control-point input
  std::vector<std::string> warnings;
};

// Validates and converts a scenario document. Throws ScenarioError naming the
// offending field.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json load_scenario_json(const std::filesystem::path& path);

// Sets a dotted key (e.g. "weights.deformation.lambda_c") in a scenario
// document. The value is parsed as JSON when possible, otherwise kept as a
// string. Type checking happens in parse_scenario.
void apply_override(nlohmann::json& doc, const std::string& key, const std::string& value);

// Full-precision scenario document; parse_scenario(scenario_to_json(s))
// reproduces s.
nlohmann::json scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

// Scenario with its reference replaced by `trajectory`.
Scenario with_reference(const Scenario& scenario, const UniformBSpline& trajectory);

FttrResult run_pipeline(const Scenario& scenario);

// Numbers as JSON, infinities as the string "inf".
nlohmann::json time_value(double t);

struct ResultBundle {
  const Scenario* scenario = nullptr;
  const FttrResult* result = nullptr;
  double grid_dt = 0.05;
};

// Writes result.json, iterations.csv, series.csv and gamma_scenario.json into
// out_dir (created if missing). Throws IoError on failure.
void export_results(const ResultBundle& bundle, const std::filesystem::path& out_dir);

// Single fixed-t_rep repair: repair.json, series.csv, candidate_scenario.json.
void export_repair(const Scenario& scenario, const RepairCandidate& candidate,
                   const FeasibilityReport& report, const std::filesystem::path& out_dir,
                   double grid_dt = 0.05);

nlohmann::json report_to_json(const FeasibilityReport& r);

}  // namespace trajrepair
