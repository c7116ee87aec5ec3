/// @file scenario.hpp
/// @brief Runs one configured scenario and writes its outputs.
///
/// Output directory layout (all modes write manifest.json):
///   flow             series.csv, monitor_<name>.json
///   report           series.csv (fine grid), series_coarse.csv, report.json,
///                    monitor_<name>.json (fine grid)
///   grassmann-check  checks.csv
///   hessian-check    checks.csv
#pragma once

#include "grassflow/checks.hpp"
#include "grassflow/config.hpp"
#include "grassflow/monitors.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace grassflow::cli {

/// Exit statuses.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;         ///< a pass/fail monitor or scan failed
inline constexpr int kExitPrecondition = 2; ///< bad config, data or monitor precondition
inline constexpr int kExitBlowUp = 3;       ///< solver error; partial series written

/// Overrides RunConfig::output when set and non-empty.
inline constexpr const char* kOutputDirEnv = "GRASSFLOW_OUTPUT_DIR";

/// Fixed leading columns of series.csv; verdict_<monitor> columns follow for
/// every enabled monitor.
const std::vector<std::string>& series_columns();

struct ScenarioResult {
  int exit_code = kExitPass;
  std::string message;
  std::filesystem::path output_dir;
  std::vector<monitors::MonitorReport> reports;  ///< fine grid in report mode
  std::vector<checks::ScanResult> scans;
  nlohmann::ordered_json manifest;
};

/// Monitors that threw PreconditionError are listed in the manifest and make
/// the exit status kExitPrecondition (after everything else is written).
ScenarioResult run_scenario(const RunConfig& cfg);

/// Stable listing of presets, their parameters with defaults and what each
/// one exercises.
std::string list_presets();

}  // namespace grassflow::cli
