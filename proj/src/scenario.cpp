/// @file scenario.cpp
/// @brief Scenario orchestration and file output.

#include "grassflow/scenario.hpp"

#include "grassflow/errors.hpp"
#include "grassflow/graph_mcf.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace grassflow::cli {

namespace fs = std::filesystem;
using monitors::MonitorReport;
using monitors::Verdict;
using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

/// Residual maxima must drop at least this much when h halves and dt quarters.
constexpr double kRefinementRatio = 3.0;
/// Below this the residuals are roundoff and the ratio carries no information.
constexpr double kRoundoffResidual = 1e-8;
/// Largest relative change of C_emp max between the two grids.
constexpr double kCempVariation = 0.2;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  if (!std::isfinite(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

json versions() {
  json v;
  v["grassflow"] = kVersion;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
               std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["boost"] = BOOST_LIB_VERSION;
  v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#if defined(__clang__)
  v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  v["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  v["cplusplus"] = __cplusplus;
  return v;
}

json config_json(const RunConfig& c) {
  json j;
  j["mode"] = c.mode;
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["grid"] = {{"n", c.n}, {"m", c.m}, {"cells", c.cells}, {"period", c.period}};
  j["preset"] = {{"name", c.preset}, {"params", c.params}};
  j["time"] = {{"t_end", c.t_end},
               {"snapshot_every", c.snapshot_every},
               {"cfl_safety", c.cfl_safety}};
  const MonitorConfig& mc = c.monitors;
  j["monitors"] = {{"enabled", mc.enabled}, {"barrier", mc.barrier},
                   {"b2h_barrier", mc.b2h_barrier}, {"theta", mc.theta},
                   {"R", mc.R}, {"C0", mc.C0}, {"a", mc.a}, {"center", mc.center},
                   {"R0", mc.R0}};
  if (mc.tau_loose) j["monitors"]["tau_loose"] = *mc.tau_loose;
  if (mc.C_bound) j["monitors"]["C_bound"] = *mc.C_bound;
  const Tolerances& t = c.tolerances;
  j["tolerances"] = {{"tau_constant", t.tau_constant},
                     {"confinable_relative", t.confinable_relative},
                     {"b2h_relative", t.b2h_relative},
                     {"ball_tol", t.ball_tol},
                     {"hemisphere_tol", t.hemisphere_tol},
                     {"kato_relative", t.kato_relative}};
  j["checks"] = {{"samples", c.checks.samples},
                 {"hessian_samples", c.checks.hessian_samples},
                 {"distance_samples", c.checks.distance_samples}};
  return j;
}

json base_manifest(const RunConfig& cfg) {
  json m;
  m["tool"] = "grassflow";
  m["mode"] = cfg.mode;
  m["seed"] = cfg.seed;
  m["versions"] = versions();
  m["config_ini"] = to_ini(cfg);
  m["config"] = config_json(cfg);
  return m;
}

bool is_failure(Verdict v) { return v == Verdict::fail; }

// --- flow --------------------------------------------------------------------

struct FlowOutcome {
  mcf::RunResult run;
  mcf::Params effective_params;
  /// Reports keyed by configured monitor name.
  std::map<std::string, MonitorReport> reports;
  std::map<std::string, std::string> precondition_failures;
  double flow_seconds = 0.0;
  double monitor_seconds = 0.0;
};

mcf::Params effective_params(const RunConfig& cfg) {
  mcf::Params p = cfg.params;
  // The run seed drives seeded presets unless the preset seed is given.
  if (mcf::preset_accepts(cfg.preset, "seed", cfg.n, cfg.m) && !p.count("seed"))
    p["seed"] = static_cast<double>(cfg.seed);
  return p;
}

MonitorReport run_monitor(const std::string& name, const RunConfig& cfg,
                          const monitors::Series& s, std::optional<double> tau_loose) {
  const MonitorConfig& mc = cfg.monitors;
  const Tolerances& tol = cfg.tolerances;
  const monitors::ResidualOptions ropt{tol.tau_constant, 2};
  if (name == "F2_identity") return monitors::check_F2_identity(s, ropt);
  if (name == "composition_identity")
    return monitors::check_composition_identity(s, monitors::parse_barrier(mc.barrier), ropt);
  if (name == "B2_inequality") {
    monitors::B2Options o;
    o.tau_loose = tau_loose ? tau_loose : mc.tau_loose;
    o.kato_relative = tol.kato_relative;
    return monitors::check_B2_inequality(s, o);
  }
  if (name == "confinable") return monitors::monitor_confinable(s, tol.confinable_relative);
  if (name == "geodesic_ball") {
    grassmann::Matrix z(cfg.n, cfg.m);
    for (int i = 0; i < cfg.n; ++i)
      for (int a = 0; a < cfg.m; ++a) z(i, a) = mc.center[i * cfg.m + a];
    return monitors::monitor_geodesic_ball(s, grassmann::GrassmannPoint(z), mc.R0,
                                           tol.ball_tol);
  }
  if (name == "hemisphere") return monitors::monitor_hemisphere(s, tol.hemisphere_tol);
  if (name == "B2h")
    return monitors::monitor_B2h(s, monitors::parse_barrier(mc.b2h_barrier),
                                 tol.b2h_relative);
  if (name == "curvature_scaling")
    return monitors::monitor_curvature_scaling(s, mc.theta, mc.R, mc.C_bound);
  if (name == "growth_bound") return monitors::monitor_growth_bound(s, mc.C0, mc.a);
  throw ValidationError("unknown monitor '" + name + "'");
}

/// Initial data errors propagate (ValidationError / DomainError); solver errors
/// end up in run.error with the frames computed so far.
FlowOutcome simulate(const RunConfig& cfg, std::optional<double> tau_loose = std::nullopt) {
  FlowOutcome out;
  out.effective_params = effective_params(cfg);
  const mcf::GraphState s0 = mcf::init_preset(cfg.preset, out.effective_params, cfg.grid());
  auto t0 = Clock::now();
  out.run = mcf::run(s0, cfg.t_end, cfg.snapshot_every, cfg.cfl_safety);
  out.flow_seconds = seconds_since(t0);
  if (out.run.error) return out;

  t0 = Clock::now();
  for (const std::string& name : monitor_names()) {
    if (!cfg.enabled(name)) continue;
    try {
      out.reports.emplace(name, run_monitor(name, cfg, out.run.frames, tau_loose));
    } catch (const PreconditionError& e) {
      out.precondition_failures[name] = e.what();
    } catch (const DomainError& e) {
      out.precondition_failures[name] = e.what();
    } catch (const ValidationError& e) {
      out.precondition_failures[name] = e.what();
    }
  }
  out.monitor_seconds = seconds_since(t0);
  return out;
}

double column_value(const FlowOutcome& o, const std::string& monitor,
                    const std::string& key, std::size_t k) {
  const auto it = o.reports.find(monitor);
  if (it == o.reports.end()) return std::numeric_limits<double>::quiet_NaN();
  const std::vector<double>* v = it->second.find(key);
  return v && k < v->size() ? (*v)[k] : std::numeric_limits<double>::quiet_NaN();
}

// sup of b2 * h over nodes; NaN when h is undefined anywhere.
double sup_weighted(const std::vector<double>& b2, const std::vector<double>& h) {
  double out = 0.0;
  for (std::size_t i = 0; i < b2.size(); ++i) {
    const double x = b2[i] * h[i];
    if (!std::isfinite(x)) return std::numeric_limits<double>::quiet_NaN();
    out = std::max(out, x);
  }
  return out;
}

std::string verdict_cell(const FlowOutcome& o, const std::string& name) {
  if (o.precondition_failures.count(name)) return "precondition";
  const auto it = o.reports.find(name);
  return it == o.reports.end() ? "" : monitors::to_string(it->second.verdict);
}

std::string series_csv(const RunConfig& cfg, const FlowOutcome& o) {
  std::ostringstream csv;
  std::vector<std::string> header = series_columns();
  for (const std::string& name : monitor_names())
    if (cfg.enabled(name)) header.push_back("verdict_" + name);
  for (std::size_t c = 0; c < header.size(); ++c) csv << (c ? "," : "") << header[c];
  csv << "\n";

  for (std::size_t k = 0; k < o.run.frames.size(); ++k) {
    const mcf::GeometrySnapshot& g = o.run.frames[k].geometry;
    const auto& d = g.sqrt_det_g;
    double max_rho = column_value(o, "geodesic_ball", "max_rho", k);
    if (!std::isfinite(max_rho)) max_rho = *std::max_element(g.rho.begin(), g.rho.end());
    const double row[] = {
        o.run.frames[k].state.t,
        *std::max_element(d.begin(), d.end()),
        *std::min_element(d.begin(), d.end()),
        *std::max_element(g.b2.begin(), g.b2.end()),
        sup_weighted(g.b2, g.h_v32),
        sup_weighted(g.b2, g.h_sec),
        max_rho,
        column_value(o, "F2_identity", "residual_max", k),
        column_value(o, "composition_identity", "residual_max", k),
        column_value(o, "B2_inequality", "slack_min", k),
        column_value(o, "curvature_scaling", "C_emp", k),
    };
    for (std::size_t c = 0; c < std::size(row); ++c) csv << (c ? "," : "") << fmt(row[c]);
    for (const std::string& name : monitor_names())
      if (cfg.enabled(name)) csv << "," << verdict_cell(o, name);
    csv << "\n";
  }
  return csv.str();
}

/// Writes series and reports of one flow; returns its exit status.
int write_flow(const RunConfig& cfg, const FlowOutcome& o, const fs::path& dir,
               const std::string& csv_name, bool write_reports, json& summary) {
  write_text(dir / csv_name, series_csv(cfg, o));
  summary["steps"] = o.run.steps;
  summary["max_dt"] = o.run.max_dt;
  summary["snapshots"] = o.run.frames.size();
  summary["effective_params"] = o.effective_params;
  if (o.run.error) {
    summary["error"] = *o.run.error;
    return kExitBlowUp;
  }
  int status = kExitPass;
  json mons = json::array();
  for (const std::string& name : monitor_names()) {
    if (!cfg.enabled(name)) continue;
    json e;
    e["monitor"] = name;
    if (const auto it = o.reports.find(name); it != o.reports.end()) {
      e["report"] = it->second.name;
      e["verdict"] = monitors::to_string(it->second.verdict);
      e["tolerance"] = it->second.tolerance;
      if (is_failure(it->second.verdict) && status == kExitPass) status = kExitFail;
      if (write_reports)
        write_text(dir / ("monitor_" + name + ".json"), it->second.to_json().dump(2) + "\n");
    } else {
      e["verdict"] = "precondition";
      e["error"] = o.precondition_failures.at(name);
      status = kExitPrecondition;
    }
    mons.push_back(e);
  }
  summary["monitors"] = mons;
  if (const auto it = o.reports.find("curvature_scaling"); it != o.reports.end())
    summary["C_emp_max"] = it->second.metadata.value("C_emp_max", 0.0);
  return status;
}

double run_extreme(const FlowOutcome& o, const std::string& monitor, const std::string& key,
                   bool take_max) {
  const auto it = o.reports.find(monitor);
  if (it == o.reports.end()) return std::numeric_limits<double>::quiet_NaN();
  const std::vector<double>* v = it->second.find(key);
  if (!v || v->empty()) return std::numeric_limits<double>::quiet_NaN();
  return take_max ? *std::max_element(v->begin(), v->end())
                  : *std::min_element(v->begin(), v->end());
}

void append_reports(const FlowOutcome& o, ScenarioResult& res) {
  for (const std::string& name : monitor_names())
    if (const auto it = o.reports.find(name); it != o.reports.end())
      res.reports.push_back(it->second);
}

int run_flow_mode(const RunConfig& cfg, const fs::path& dir, ScenarioResult& res) {
  const FlowOutcome o = simulate(cfg);
  json summary;
  const int status = write_flow(cfg, o, dir, "series.csv", true, summary);
  res.manifest["run"] = summary;
  res.manifest["timings"] = {{"flow_seconds", o.flow_seconds},
                             {"monitor_seconds", o.monitor_seconds}};
  if (summary.contains("C_emp_max")) res.manifest["C_emp_max"] = summary["C_emp_max"];
  append_reports(o, res);
  if (o.run.error) res.message = "solver error: " + *o.run.error;
  return status;
}

int run_report_mode(const RunConfig& cfg, const fs::path& dir, ScenarioResult& res) {
  RunConfig fine_cfg = cfg;
  for (int& N : fine_cfg.cells) N *= 2;
  fine_cfg.snapshot_every = cfg.snapshot_every / 4.0;
  for (int N : fine_cfg.cells)
    if (N > 512) throw ValidationError("config key 'grid.cells': report mode doubles N; "
                                       "2N must not exceed 512");

  const FlowOutcome coarse = simulate(cfg);
  json coarse_summary;
  const int coarse_status =
      write_flow(cfg, coarse, dir, "series_coarse.csv", false, coarse_summary);
  if (coarse_status == kExitBlowUp) {
    res.manifest["coarse"] = coarse_summary;
    res.message = "solver error on the coarse grid: " + *coarse.run.error;
    return kExitBlowUp;
  }

  // Loose B2 tolerance from the change under refinement, unless configured.
  std::optional<double> tau_loose = cfg.monitors.tau_loose;
  FlowOutcome fine;
  if (!tau_loose && cfg.enabled("B2_inequality")) {
    fine = simulate(fine_cfg);
    const double s_c = run_extreme(coarse, "B2_inequality", "slack_min", false);
    const double s_f = run_extreme(fine, "B2_inequality", "slack_min", false);
    if (std::isfinite(s_c) && std::isfinite(s_f)) {
      tau_loose = 10.0 * std::abs(s_f - s_c) / 3.0;
      monitors::B2Options o;
      o.tau_loose = tau_loose;
      o.kato_relative = cfg.tolerances.kato_relative;
      fine.reports.erase("B2_inequality");
      fine.reports.emplace("B2_inequality", monitors::check_B2_inequality(fine.run.frames, o));
    }
  } else {
    fine = simulate(fine_cfg, tau_loose);
  }
  json fine_summary;
  int status = write_flow(fine_cfg, fine, dir, "series.csv", true, fine_summary);
  res.manifest["coarse"] = coarse_summary;
  res.manifest["fine"] = fine_summary;
  res.manifest["timings"] = {{"coarse_flow_seconds", coarse.flow_seconds},
                             {"coarse_monitor_seconds", coarse.monitor_seconds},
                             {"fine_flow_seconds", fine.flow_seconds},
                             {"fine_monitor_seconds", fine.monitor_seconds}};
  append_reports(fine, res);
  if (status == kExitBlowUp) {
    res.message = "solver error on the fine grid: " + *fine.run.error;
    return status;
  }
  if (coarse_status == kExitPrecondition || status == kExitPrecondition) {
    status = kExitPrecondition;
  } else if (coarse_status == kExitFail) {
    status = kExitFail;
  }

  json refine = json::array();
  bool refine_ok = true;
  for (const std::string& name : {std::string("F2_identity"),
                                  std::string("composition_identity")}) {
    if (!cfg.enabled(name)) continue;
    const double rc = run_extreme(coarse, name, "residual_max", true);
    const double rf = run_extreme(fine, name, "residual_max", true);
    if (!std::isfinite(rc) || !std::isfinite(rf)) continue;
    const bool roundoff = rc <= kRoundoffResidual && rf <= kRoundoffResidual;
    const bool ok = roundoff || rc >= kRefinementRatio * rf;
    refine.push_back({{"monitor", name},
                      {"coarse_max", rc},
                      {"fine_max", rf},
                      {"ratio", rf > 0.0 ? rc / rf : 0.0},
                      {"required_ratio", kRefinementRatio},
                      {"roundoff_level", roundoff},
                      {"verdict", ok ? "pass" : "fail"}});
    refine_ok = refine_ok && ok;
  }
  if (tau_loose) {
    refine.push_back({{"monitor", "B2_inequality"},
                      {"coarse_slack_min", run_extreme(coarse, "B2_inequality", "slack_min", false)},
                      {"fine_slack_min", run_extreme(fine, "B2_inequality", "slack_min", false)},
                      {"tau_loose", *tau_loose},
                      {"verdict", monitors::to_string(fine.reports.count("B2_inequality")
                                                          ? fine.reports.at("B2_inequality").verdict
                                                          : Verdict::informational)}});
  }
  if (cfg.enabled("curvature_scaling")) {
    const double cc = run_extreme(coarse, "curvature_scaling", "C_emp", true);
    const double cf = run_extreme(fine, "curvature_scaling", "C_emp", true);
    if (std::isfinite(cc) && std::isfinite(cf)) {
      const double var = std::abs(cf - cc) / std::max(std::abs(cc), 1e-300);
      const bool ok = var < kCempVariation;
      refine.push_back({{"monitor", "curvature_scaling"},
                        {"coarse_C_emp_max", cc},
                        {"fine_C_emp_max", cf},
                        {"relative_variation", var},
                        {"allowed_variation", kCempVariation},
                        {"verdict", ok ? "pass" : "fail"}});
      refine_ok = refine_ok && ok;
      res.manifest["C_emp_max"] = std::max(cc, cf);
    }
  }
  if (cfg.enabled("B2h")) {
    const auto vc = coarse.reports.find("B2h");
    const auto vf = fine.reports.find("B2h");
    if (vc != coarse.reports.end() && vf != fine.reports.end()) {
      const double ic = vc->second.metadata.value("max_relative_increase", 0.0);
      const double iv = vf->second.metadata.value("max_relative_increase", 0.0);
      const bool ok = iv <= std::max(ic, cfg.tolerances.b2h_relative);
      refine.push_back({{"monitor", "B2h"},
                        {"coarse_max_relative_increase", ic},
                        {"fine_max_relative_increase", iv},
                        {"verdict", ok ? "pass" : "fail"}});
      refine_ok = refine_ok && ok;
    }
  }
  json report;
  report["coarse_cells"] = cfg.cells;
  report["fine_cells"] = fine_cfg.cells;
  report["coarse_snapshot_every"] = cfg.snapshot_every;
  report["fine_snapshot_every"] = fine_cfg.snapshot_every;
  report["refinement"] = refine;
  report["verdict"] = refine_ok ? "pass" : "fail";
  write_text(dir / "report.json", report.dump(2) + "\n");
  res.manifest["refinement"] = report;
  if (!refine_ok && status == kExitPass) status = kExitFail;
  return status;
}

// --- checks --------------------------------------------------------------------

int write_scans(const std::vector<checks::ScanResult>& scans, const fs::path& dir,
                ScenarioResult& res) {
  std::ostringstream csv;
  csv << "name,samples,skipped,violations,worst,tolerance,pass\n";
  json timings;
  bool ok = true;
  for (const auto& s : scans) {
    csv << s.name << "," << s.samples << "," << s.skipped << "," << s.violations << ","
        << fmt(s.worst) << "," << fmt(s.tolerance) << "," << (s.pass ? "pass" : "fail")
        << "\n";
    timings[s.name + "_seconds"] = s.seconds;
    ok = ok && s.pass;
  }
  write_text(dir / "checks.csv", csv.str());
  json summary = json::array();
  for (const auto& s : scans)
    summary.push_back({{"name", s.name},
                       {"samples", s.samples},
                       {"skipped", s.skipped},
                       {"violations", s.violations},
                       {"worst", s.worst},
                       {"tolerance", s.tolerance},
                       {"pass", s.pass}});
  res.manifest["checks"] = summary;
  res.manifest["timings"] = timings;
  res.scans = scans;
  return ok ? kExitPass : kExitFail;
}

}  // namespace

const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> cols = {
      "t",           "sup_delta_f",     "min_delta_f",         "sup_b2",
      "sup_b2_h_v32", "sup_b2_h_sec",   "max_rho",             "residual_F2_max",
      "residual_compid_max", "slack_B2_min", "C_emp"};
  return cols;
}

ScenarioResult run_scenario(const RunConfig& cfg) {
  ScenarioResult res;
  const char* env = std::getenv(kOutputDirEnv);
  res.output_dir = env && *env ? fs::path(env) : fs::path(cfg.output);
  fs::create_directories(res.output_dir);
  res.manifest = base_manifest(cfg);
  res.manifest["output_dir"] = res.output_dir.string();

  const auto t0 = Clock::now();
  try {
    if (cfg.mode == "flow") {
      res.exit_code = run_flow_mode(cfg, res.output_dir, res);
    } else if (cfg.mode == "report") {
      res.exit_code = run_report_mode(cfg, res.output_dir, res);
    } else if (cfg.mode == "grassmann-check") {
      res.exit_code =
          write_scans(checks::kernel_scans(cfg.checks.samples, cfg.seed), res.output_dir, res);
    } else {
      res.exit_code = write_scans(checks::oracle_scans(cfg.checks.hessian_samples,
                                                       cfg.checks.distance_samples, cfg.seed),
                                  res.output_dir, res);
    }
  } catch (const ValidationError& e) {
    res.exit_code = kExitPrecondition;
    res.message = e.what();
  } catch (const DomainError& e) {
    res.exit_code = kExitPrecondition;
    res.message = e.what();
  }
  res.manifest["total_seconds"] = seconds_since(t0);
  res.manifest["exit_status"] = res.exit_code;
  if (!res.message.empty()) res.manifest["message"] = res.message;
  write_text(res.output_dir / "manifest.json", res.manifest.dump(2) + "\n");
  return res;
}

std::string list_presets() {
  std::ostringstream out;
  for (const mcf::PresetInfo& p : mcf::preset_catalog()) {
    out << p.name << "\n  parameters:";
    for (const auto& [key, value] : p.defaults) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", value);
      out << " " << key << "=" << buf;
    }
    out << "\n  common: target_sup_delta_f, target_max_rho, require_delta_below_two\n"
        << "  data: " << p.description << "\n  exercises: " << p.exercises << "\n";
  }
  return out.str();
}

}  // namespace grassflow::cli
