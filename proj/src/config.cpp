/// @file config.cpp
/// @brief INI parsing, validation and echo of RunConfig.

#include "grassflow/config.hpp"

#include "grassflow/errors.hpp"
#include "grassflow/grassmann.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace grassflow::cli {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kModes = {"flow", "grassmann-check", "hessian-check",
                                      "report"};

const std::map<std::string, std::set<std::string>>& section_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"mode", "seed", "output"}},
      {"grid", {"n", "m", "cells", "period"}},
      {"preset", {"name"}},  // plus preset parameters, checked separately
      {"time", {"t_end", "snapshot_every", "cfl_safety"}},
      {"monitors",
       {"enabled", "barrier", "b2h_barrier", "theta", "R", "C0", "a", "center", "R0",
        "tau_loose", "C_bound"}},
      {"tolerances",
       {"tau_constant", "confinable_relative", "b2h_relative", "ball_tol",
        "hemisphere_tol", "kato_relative"}},
      {"checks", {"samples", "hessian_samples", "distance_samples"}},
  };
  return keys;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError("config key '" + path + "': " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& path, const std::string& text) {
  const std::string t = trim(text);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    fail(path, "expected a number, got '" + text + "'");
  if (!std::isfinite(out)) fail(path, "value must be finite");
  return out;
}

template <class Int>
Int to_int(const std::string& path, const std::string& text) {
  const std::string t = trim(text);
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    fail(path, "expected an integer, got '" + text + "'");
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(xs[k]);
    } else if constexpr (std::is_integral_v<T>) {
      out += std::to_string(xs[k]);
    } else {
      out += xs[k];
    }
  }
  return out;
}

// Lookup helpers over one section.
struct Section {
  const pt::ptree* tree = nullptr;
  std::string name;

  std::optional<std::string> raw(const std::string& key) const {
    if (!tree) return std::nullopt;
    const auto it = tree->find(key);
    if (it == tree->not_found()) return std::nullopt;
    return trim(it->second.data());
  }
  std::string path(const std::string& key) const { return name + "." + key; }

  void read(const std::string& key, double& out) const {
    if (auto r = raw(key)) out = to_double(path(key), *r);
  }
  void read(const std::string& key, std::optional<double>& out) const {
    if (auto r = raw(key)) out = to_double(path(key), *r);
  }
  void read(const std::string& key, int& out) const {
    if (auto r = raw(key)) out = to_int<int>(path(key), *r);
  }
  void read(const std::string& key, long& out) const {
    if (auto r = raw(key)) out = to_int<long>(path(key), *r);
  }
  void read(const std::string& key, std::uint64_t& out) const {
    if (auto r = raw(key)) out = to_int<std::uint64_t>(path(key), *r);
  }
  void read(const std::string& key, std::string& out) const {
    if (auto r = raw(key)) out = *r;
  }
  void require(const std::string& key) const {
    if (!raw(key)) fail(path(key), "missing required key");
  }
};

void check_positive(const std::string& path, double x) {
  if (!(x > 0.0)) fail(path, "must be positive, got " + fmt(x));
}

void validate(RunConfig& c, bool needs_flow) {
  if (!kModes.count(c.mode))
    fail("run.mode", "unknown mode '" + c.mode +
                         "' (expected flow, grassmann-check, hessian-check or report)");
  if (c.output.empty()) fail("run.output", "must not be empty");

  if (c.checks.samples < 1) fail("checks.samples", "must be at least 1");
  if (c.checks.hessian_samples < 1) fail("checks.hessian_samples", "must be at least 1");
  if (c.checks.distance_samples < 1)
    fail("checks.distance_samples", "must be at least 1");

  if (c.n < 1 || c.n > 3) fail("grid.n", "must be in 1..3, got " + std::to_string(c.n));
  if (c.m < 1 || c.m > 3) fail("grid.m", "must be in 1..3, got " + std::to_string(c.m));

  const Tolerances& t = c.tolerances;
  check_positive("tolerances.tau_constant", t.tau_constant);
  check_positive("tolerances.confinable_relative", t.confinable_relative);
  check_positive("tolerances.b2h_relative", t.b2h_relative);
  if (!(t.ball_tol >= 0.0)) fail("tolerances.ball_tol", "must be nonnegative");
  if (!(t.hemisphere_tol >= 0.0)) fail("tolerances.hemisphere_tol", "must be nonnegative");
  check_positive("tolerances.kato_relative", t.kato_relative);

  MonitorConfig& mc = c.monitors;
  for (const auto& name : mc.enabled) {
    const auto& known = monitor_names();
    if (std::find(known.begin(), known.end(), name) == known.end())
      fail("monitors.enabled", "unknown monitor '" + name + "'");
  }
  if (mc.barrier != "v" && mc.barrier != "v32" && mc.barrier != "sec")
    fail("monitors.barrier", "expected v, v32 or sec, got '" + mc.barrier + "'");
  if (mc.b2h_barrier != "v32" && mc.b2h_barrier != "sec")
    fail("monitors.b2h_barrier", "expected v32 or sec, got '" + mc.b2h_barrier + "'");
  if (!(mc.theta > 0.0 && mc.theta < 1.0)) fail("monitors.theta", "must be in (0, 1)");
  check_positive("monitors.C0", mc.C0);
  if (!(mc.a >= 0.0)) fail("monitors.a", "must be nonnegative");
  if (!(mc.R0 > 0.0 && mc.R0 <= grassmann::kCriticalRadius))
    fail("monitors.R0", "must be in (0, " + fmt(grassmann::kCriticalRadius) + "]");
  if (mc.tau_loose) check_positive("monitors.tau_loose", *mc.tau_loose);
  if (mc.C_bound) check_positive("monitors.C_bound", *mc.C_bound);

  if (c.period.empty()) c.period = {2.0 * std::numbers::pi};
  if (c.period.size() == 1 && c.n > 1) c.period.assign(c.n, c.period[0]);
  if (c.period.size() != static_cast<std::size_t>(c.n))
    fail("grid.period", "expected 1 or n = " + std::to_string(c.n) + " values");
  for (double L : c.period) check_positive("grid.period", L);

  if (mc.center.empty()) mc.center.assign(c.n * c.m, 0.0);
  if (mc.center.size() != static_cast<std::size_t>(c.n * c.m))
    fail("monitors.center", "expected n*m = " + std::to_string(c.n * c.m) + " values");
  if (!(mc.R > 0.0)) {
    if (mc.R != 0.0) fail("monitors.R", "must be positive");
    mc.R = 0.5 * *std::min_element(c.period.begin(), c.period.end());
  }

  if (!needs_flow) return;

  if (c.cells.size() == 1 && c.n > 1) c.cells.assign(c.n, c.cells[0]);
  if (c.cells.size() != static_cast<std::size_t>(c.n))
    fail("grid.cells", "expected 1 or n = " + std::to_string(c.n) + " values");
  for (int N : c.cells)
    if (N < 8 || N > 512) fail("grid.cells", "each value must be in 8..512");

  if (!mcf::preset_exists(c.preset)) fail("preset.name", "unknown preset '" + c.preset + "'");
  for (const auto& [key, value] : c.params)
    if (!mcf::preset_accepts(c.preset, key, c.n, c.m))
      fail("preset." + key, "preset '" + c.preset + "' has no such parameter");

  check_positive("time.t_end", c.t_end);
  if (c.snapshot_every == 0.0) c.snapshot_every = c.t_end / 10.0;
  check_positive("time.snapshot_every", c.snapshot_every);
  if (c.snapshot_every > c.t_end) fail("time.snapshot_every", "must not exceed t_end");
  if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0))
    fail("time.cfl_safety", "must be in (0, 1]");
}

}  // namespace

const std::vector<std::string>& monitor_names() {
  static const std::vector<std::string> names = {
      "F2_identity",  "composition_identity", "B2_inequality",
      "confinable",   "geodesic_ball",        "hemisphere",
      "B2h",          "curvature_scaling",    "growth_bound"};
  return names;
}

mcf::GridSpec RunConfig::grid() const {
  mcf::GridSpec g;
  g.n = n;
  g.m = m;
  g.cells = cells;
  g.period = period;
  g.origin.assign(n, 0.0);
  return g;
}

bool RunConfig::enabled(const std::string& monitor) const {
  return std::find(monitors.enabled.begin(), monitors.enabled.end(), monitor) !=
         monitors.enabled.end();
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config syntax error: ") + e.what());
  }

  std::map<std::string, Section> sec;
  for (const auto& [name, child] : tree) {
    const auto known = section_keys().find(name);
    if (known == section_keys().end()) {
      if (!child.data().empty()) fail(name, "unknown key outside any section");
      fail(name, "unknown section");
    }
    sec[name] = Section{&child, name};
    for (const auto& [key, value] : child) {
      if (name == "preset") continue;
      if (!known->second.count(key)) fail(name + "." + key, "unknown key");
    }
  }
  auto get = [&](const std::string& name) {
    const auto it = sec.find(name);
    return it == sec.end() ? Section{nullptr, name} : it->second;
  };

  RunConfig c;
  const Section run = get("run");
  run.require("mode");
  run.read("mode", c.mode);
  run.read("seed", c.seed);
  run.read("output", c.output);
  const bool needs_flow = c.mode == "flow" || c.mode == "report";

  const Section grid = get("grid");
  if (needs_flow) {
    grid.require("n");
    grid.require("m");
    grid.require("cells");
  }
  grid.read("n", c.n);
  grid.read("m", c.m);
  if (auto r = grid.raw("cells"))
    for (const auto& item : split_list(*r)) c.cells.push_back(to_int<int>("grid.cells", item));
  if (auto r = grid.raw("period"))
    for (const auto& item : split_list(*r)) c.period.push_back(to_double("grid.period", item));

  const Section preset = get("preset");
  if (needs_flow) preset.require("name");
  preset.read("name", c.preset);
  if (preset.tree)
    for (const auto& [key, value] : *preset.tree)
      if (key != "name") c.params[key] = to_double("preset." + key, value.data());

  const Section time = get("time");
  if (needs_flow) time.require("t_end");
  time.read("t_end", c.t_end);
  time.read("snapshot_every", c.snapshot_every);
  time.read("cfl_safety", c.cfl_safety);

  const Section mon = get("monitors");
  if (auto r = mon.raw("enabled")) c.monitors.enabled = split_list(*r);
  mon.read("barrier", c.monitors.barrier);
  mon.read("b2h_barrier", c.monitors.b2h_barrier);
  mon.read("theta", c.monitors.theta);
  mon.read("R", c.monitors.R);
  mon.read("C0", c.monitors.C0);
  mon.read("a", c.monitors.a);
  if (auto r = mon.raw("center"))
    for (const auto& item : split_list(*r))
      c.monitors.center.push_back(to_double("monitors.center", item));
  mon.read("R0", c.monitors.R0);
  mon.read("tau_loose", c.monitors.tau_loose);
  mon.read("C_bound", c.monitors.C_bound);

  const Section tol = get("tolerances");
  tol.read("tau_constant", c.tolerances.tau_constant);
  tol.read("confinable_relative", c.tolerances.confinable_relative);
  tol.read("b2h_relative", c.tolerances.b2h_relative);
  tol.read("ball_tol", c.tolerances.ball_tol);
  tol.read("hemisphere_tol", c.tolerances.hemisphere_tol);
  tol.read("kato_relative", c.tolerances.kato_relative);

  const Section chk = get("checks");
  chk.read("samples", c.checks.samples);
  chk.read("hessian_samples", c.checks.hessian_samples);
  chk.read("distance_samples", c.checks.distance_samples);

  validate(c, needs_flow);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream o;
  o << "[run]\nmode = " << c.mode << "\nseed = " << c.seed << "\noutput = " << c.output
    << "\n\n[grid]\nn = " << c.n << "\nm = " << c.m << "\n";
  if (!c.cells.empty()) o << "cells = " << join(c.cells) << "\n";
  o << "period = " << join(c.period) << "\n\n[preset]\n";
  if (!c.preset.empty()) o << "name = " << c.preset << "\n";
  for (const auto& [key, value] : c.params) o << key << " = " << fmt(value) << "\n";
  o << "\n[time]\n";
  if (c.t_end > 0.0) {
    o << "t_end = " << fmt(c.t_end) << "\nsnapshot_every = " << fmt(c.snapshot_every)
      << "\n";
  }
  o << "cfl_safety = " << fmt(c.cfl_safety) << "\n\n";
  const MonitorConfig& mc = c.monitors;
  o << "[monitors]\nenabled = " << join(mc.enabled) << "\nbarrier = " << mc.barrier
    << "\nb2h_barrier = " << mc.b2h_barrier << "\ntheta = " << fmt(mc.theta)
    << "\nR = " << fmt(mc.R) << "\nC0 = " << fmt(mc.C0) << "\na = " << fmt(mc.a)
    << "\ncenter = " << join(mc.center) << "\nR0 = " << fmt(mc.R0) << "\n";
  if (mc.tau_loose) o << "tau_loose = " << fmt(*mc.tau_loose) << "\n";
  if (mc.C_bound) o << "C_bound = " << fmt(*mc.C_bound) << "\n";
  const Tolerances& t = c.tolerances;
  o << "\n[tolerances]\ntau_constant = " << fmt(t.tau_constant)
    << "\nconfinable_relative = " << fmt(t.confinable_relative)
    << "\nb2h_relative = " << fmt(t.b2h_relative) << "\nball_tol = " << fmt(t.ball_tol)
    << "\nhemisphere_tol = " << fmt(t.hemisphere_tol)
    << "\nkato_relative = " << fmt(t.kato_relative) << "\n";
  o << "\n[checks]\nsamples = " << c.checks.samples
    << "\nhessian_samples = " << c.checks.hessian_samples
    << "\ndistance_samples = " << c.checks.distance_samples << "\n";
  return o.str();
}

}  // namespace grassflow::cli
