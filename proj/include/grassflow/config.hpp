/// @file config.hpp
/// @brief Run configuration: INI text in, validated RunConfig out, and back.
///
/// Sections and keys (anything else is an error naming its key path):
///
///   [run]        mode, seed, output
///   [grid]       n, m, cells, period
///   [preset]     name, then any parameter the preset accepts
///   [time]       t_end, snapshot_every, cfl_safety
///   [monitors]   enabled, barrier, b2h_barrier, theta, R, C0, a, center, R0,
///                tau_loose, C_bound
///   [tolerances] tau_constant, confinable_relative, b2h_relative, ball_tol,
///                hemisphere_tol, kato_relative
///   [checks]     samples, hessian_samples, distance_samples
///
/// `cells` and `period` take one value for every axis or a comma list with one
/// value per axis. `enabled` and `center` are comma lists.
#pragma once

#include "grassflow/graph_mcf.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grassflow::cli {

inline constexpr const char* kVersion = "0.4.0";

/// Monitor names accepted in [monitors] enabled, in the order their reports
/// and verdict columns are written.
const std::vector<std::string>& monitor_names();

struct MonitorConfig {
  std::vector<std::string> enabled = {"F2_identity", "composition_identity"};
  std::string barrier = "v";        ///< composition identity: v, v32 or sec
  std::string b2h_barrier = "v32";  ///< sup |B|^2 h~: v32 or sec
  double theta = 0.5;               ///< curvature scaling inner ratio
  double R = 0.0;                   ///< curvature scaling radius
  double C0 = 1.0;                  ///< growth bound
  double a = 0.0;
  std::vector<double> center;       ///< n*m chart entries, row-major
  double R0 = 1.1107207345395915;   ///< geodesic ball radius
  std::optional<double> tau_loose;  ///< B2 inequality
  std::optional<double> C_bound;    ///< curvature scaling
  bool operator==(const MonitorConfig&) const = default;
};

struct Tolerances {
  double tau_constant = 2.0;
  double confinable_relative = 1e-6;
  double b2h_relative = 1e-3;
  double ball_tol = 1e-9;
  double hemisphere_tol = 0.0;
  double kato_relative = 1e-2;
  bool operator==(const Tolerances&) const = default;
};

struct CheckConfig {
  long samples = 10000;
  long hessian_samples = 1000;
  long distance_samples = 100;
  bool operator==(const CheckConfig&) const = default;
};

struct RunConfig {
  std::string mode = "flow";  ///< flow, grassmann-check, hessian-check, report
  std::uint64_t seed = 0;
  std::string output = "grassflow_out";
  int n = 1;
  int m = 1;
  std::vector<int> cells;
  std::vector<double> period;
  std::string preset;
  mcf::Params params;
  double t_end = 0.0;
  double snapshot_every = 0.0;
  double cfl_safety = 0.5;
  MonitorConfig monitors;
  Tolerances tolerances;
  CheckConfig checks;

  mcf::GridSpec grid() const;
  bool enabled(const std::string& monitor) const;
  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates; fills defaults (seed 0, period 2 pi, snapshot_every
/// t_end / 10, R half the smallest period, center 0). ValidationError on any
/// problem, with the key path in the message.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Every field, defaults included, with 17 significant digits:
/// parse_config(to_ini(c)) == c.
std::string to_ini(const RunConfig& cfg);

}  // namespace grassflow::cli
