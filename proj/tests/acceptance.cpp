// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Every tolerance is pinned below; scenarios go through run_scenario so that
// the determinism criterion can rerun them and compare bytes.

#include "grassflow/checks.hpp"
#include "grassflow/config.hpp"
#include "grassflow/graph_mcf.hpp"
#include "grassflow/grassmann.hpp"
#include "grassflow/scenario.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
namespace gc = grassflow::cli;
using json = nlohmann::ordered_json;

namespace {

// --- pinned tolerances ----------------------------------------------------------
constexpr double kHessianRelTol = 1e-5;
constexpr double kHessianSeconds = 60.0;
constexpr double kScanSeconds = 60.0;
constexpr double kDefinitenessAgreement = 0.999;
constexpr double kDistanceTol = 1e-4;
constexpr double kGrimReaperErr = 5e-4;
constexpr double kGrimReaperRatio = 3.0;
constexpr double kGrimReaperSeconds = 120.0;
constexpr double kIdentityRatio = 3.0;
constexpr double kIdentitySeconds = 300.0;
constexpr double kConfinableRel = 1e-6;
constexpr double kB2hRel = 1e-3;
constexpr double kCempVariation = 0.2;
constexpr double kCriticalRadius = grassflow::grassmann::kCriticalRadius;
// json::value returns the type of its default; keep these double.
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

const fs::path kRoot = fs::temp_directory_path() / "grassflow_acceptance";

struct Scenario {
  std::string name;
  std::string ini;
  gc::ScenarioResult result;
  double seconds = 0.0;
};

std::map<std::string, Scenario> scenarios;

gc::RunConfig config_of(const Scenario& s, const std::string& run) {
  gc::RunConfig c = gc::parse_config(s.ini);
  c.output = (kRoot / s.name / run).string();
  return c;
}

const gc::ScenarioResult& run(const std::string& name, const std::string& ini) {
  Scenario& s = scenarios[name];
  s.name = name;
  s.ini = ini;
  fs::remove_all(kRoot / name);
  const auto t0 = Clock::now();
  s.result = gc::run_scenario(config_of(s, "first"));
  s.seconds = seconds_since(t0);
  return s.result;
}

const grassflow::checks::ScanResult* scan(const gc::ScenarioResult& r, const std::string& name) {
  for (const auto& s : r.scans)
    if (s.name == name) return &s;
  return nullptr;
}

const grassflow::monitors::MonitorReport* report(const gc::ScenarioResult& r,
                                                 const std::string& prefix) {
  for (const auto& m : r.reports)
    if (m.name.rfind(prefix, 0) == 0) return &m;
  return nullptr;
}

// Verdict of `monitor` on the coarse grid of a report-mode scenario.
std::string coarse_verdict(const gc::ScenarioResult& r, const std::string& monitor) {
  for (const auto& m : r.manifest["coarse"]["monitors"])
    if (m["monitor"] == monitor) return m["verdict"].get<std::string>();
  return "missing";
}

const json* refinement(const gc::ScenarioResult& r, const std::string& monitor) {
  if (!r.manifest.contains("refinement")) return nullptr;
  for (const auto& e : r.manifest["refinement"]["refinement"])
    if (e["monitor"] == monitor) return &e;
  return nullptr;
}

double series_max(const std::vector<double>& v) {
  double out = -kInf;
  for (double x : v) out = std::max(out, x);
  return out;
}

std::string flow_ini(const std::string& mode, int n, int m, int cells, const std::string& preset,
                     const std::string& params, double t_end, double every,
                     const std::string& monitors) {
  std::ostringstream o;
  char buf[64];
  o << "[run]\nmode = " << mode << "\n[grid]\nn = " << n << "\nm = " << m
    << "\ncells = " << cells << "\n[preset]\nname = " << preset << "\n" << params;
  std::snprintf(buf, sizeof buf, "%.17g", t_end);
  o << "[time]\nt_end = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", every);
  o << "snapshot_every = " << buf << "\n[monitors]\n" << monitors;
  return o.str();
}

// --- criteria -----------------------------------------------------------------------

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome c01_hessian() {
  const auto& r = run("hessian_check",
                      "[run]\nmode = hessian-check\n[checks]\nhessian_samples = 1000\n"
                      "distance_samples = 100\n");
  const auto* s = scan(r, "hessian_vs_oracle");
  if (!s) return {false, "scan missing"};
  const bool ok = s->samples == 1000 && s->violations == 0 && s->worst <= kHessianRelTol &&
                  s->seconds < kHessianSeconds;
  return {ok, "1000 samples, worst relative error " + g(s->worst) + " (limit " +
                  g(kHessianRelTol) + "), " + g(s->seconds) + " s"};
}

Outcome kernel_scan(const std::string& name, long samples) {
  if (!scenarios.count("grassmann_check"))
    run("grassmann_check", "[run]\nmode = grassmann-check\n[checks]\nsamples = 10000\n");
  const auto* s = scan(scenarios["grassmann_check"].result, name);
  if (!s) return {false, "scan missing"};
  const bool ok = s->samples == samples && s->violations == 0 && s->seconds < kScanSeconds;
  return {ok, std::to_string(s->samples) + " samples, " + std::to_string(s->violations) +
                  " violations, worst normalized value " + g(s->worst) + ", " +
                  g(s->seconds) + " s"};
}

Outcome c04_definiteness() {
  kernel_scan("definiteness_boundary", 1000);
  const auto* s = scan(scenarios["grassmann_check"].result, "definiteness_boundary");
  if (!s) return {false, "scan missing"};
  const bool ok = s->samples + s->skipped == 1000 && s->worst >= kDefinitenessAgreement;
  return {ok, "agreement " + g(100.0 * s->worst) + "% over " + std::to_string(s->samples) +
                  " samples (" + std::to_string(s->skipped) + " with margin <= 1e-6 skipped)"};
}

Outcome c06_distance() {
  const auto* s = scan(scenarios["hessian_check"].result, "distance_vs_shooting");
  if (!s) return {false, "scan missing"};
  const bool ok = s->samples == 100 && s->violations == 0 && s->worst <= kDistanceTol;
  return {ok, "100 samples, worst |rho - shooting| " + g(s->worst)};
}

double grim_reaper_error(int cells) {
  using namespace grassflow::mcf;
  const GridSpec spec = GridSpec::uniform(1, 1, cells, 1.0);
  const GraphState s0 = init_preset("grim_reaper", {{"delta", 0.3}}, spec);
  const RunResult r = run(s0, 0.2, 0.2);
  if (r.error) return kInf;
  const GraphState& s = r.frames.back().state;
  const double inner = 0.5 * (std::numbers::pi / 2.0 - 0.3);
  double err = 0.0;
  for (std::size_t k = 0; k < s.spec.node_count(); ++k) {
    const double x = s.spec.coord(k, 0);
    if (std::abs(x) > inner) continue;
    err = std::max(err, std::abs(s.f[k] - (-std::log(std::cos(x)) + s.t)));
  }
  return err;
}

Outcome c07_grim_reaper() {
  const auto t0 = Clock::now();
  const double e128 = grim_reaper_error(128);
  const double e256 = grim_reaper_error(256);
  const double secs = seconds_since(t0);
  const bool ok = e256 <= kGrimReaperErr && e128 / e256 >= kGrimReaperRatio &&
                  secs < kGrimReaperSeconds;
  return {ok, "interior error " + g(e256) + " at N=256, ratio " + g(e128 / e256) +
                  " from N=128, " + g(secs) + " s"};
}

Outcome identity(const std::string& monitor) {
  if (!scenarios.count("sine_identities")) {
    const double h = 2.0 * std::numbers::pi / 64;
    run("sine_identities",
        flow_ini("report", 2, 2, 64, "sine", "a = 0.3\nb = 0.2\nc = 0.1\n", 0.05,
                 0.5 * h * h, "enabled = F2_identity, composition_identity\nbarrier = v\n"));
  }
  const Scenario& sc = scenarios["sine_identities"];
  const json* e = refinement(sc.result, monitor);
  if (!e) return {false, "refinement entry missing (exit " +
                             std::to_string(sc.result.exit_code) + ")"};
  const auto* fine = report(sc.result, monitor);
  const double tau = fine ? fine->tolerance : kNaN;
  const bool ok = coarse_verdict(sc.result, monitor) == "pass" &&
                  (*e)["ratio"].get<double>() >= kIdentityRatio &&
                  fine && fine->verdict == grassflow::monitors::Verdict::pass &&
                  sc.seconds < kIdentitySeconds;
  return {ok, "max residual " + g((*e)["coarse_max"].get<double>()) + " at N=64 (within tau), " +
                  g((*e)["fine_max"].get<double>()) + " at N=128 (tau " + g(tau) +
                  "), ratio " + g((*e)["ratio"].get<double>()) + ", " + g(sc.seconds) + " s"};
}

struct Family {
  std::string name;
  int n, m;
  std::string preset;
  std::string params;
};

const std::vector<Family> kConfinable = {
    {"confinable_sine_1.5", 2, 2, "sine", "a = 0.3\nb = 0.2\nc = 0.1\ntarget_sup_delta_f = 1.5\n"},
    {"confinable_curve_1.9", 1, 2, "sine", "b = 0.3\ntarget_sup_delta_f = 1.9\n"},
    {"confinable_random1_1.9", 2, 2, "random_smooth", "seed = 1\ntarget_sup_delta_f = 1.9\n"},
    {"confinable_random2_1.99", 2, 3, "random_smooth", "seed = 2\ntarget_sup_delta_f = 1.99\n"},
    {"confinable_random3_1.5", 2, 1, "random_smooth", "seed = 3\ntarget_sup_delta_f = 1.5\n"},
};

Outcome c10_confinable() {
  bool ok = true;
  std::string detail;
  for (const Family& f : kConfinable) {
    const auto& r = run(f.name, flow_ini("flow", f.n, f.m, 32, f.preset, f.params, 0.2, 0.01,
                                         "enabled = confinable, B2h\nb2h_barrier = v32\n"));
    const auto* rep = report(r, "confinable");
    if (!rep) {
      ok = false;
      detail += f.name + ": missing; ";
      continue;
    }
    const double inc = rep->metadata.value("max_relative_increase", kInf);
    const bool below = rep->metadata.value("never_reaches_two", false);
    const auto* sup = rep->find("sup_delta_f");
    const bool pass = rep->verdict == grassflow::monitors::Verdict::pass && below &&
                      inc <= kConfinableRel;
    ok = ok && pass;
    detail += f.name.substr(11) + " " + g(sup->front()) + "->" + g(sup->back()) +
              (pass ? "" : " FAILED") + "; ";
  }
  return {ok, detail + "largest allowed relative increase " + g(kConfinableRel)};
}

Outcome c11_geodesic_ball() {
  char buf[64];
  std::snprintf(buf, sizeof buf, "target_max_rho = %.17g\n", 0.9 * kCriticalRadius);
  const auto& r = run("geodesic_ball",
                      flow_ini("flow", 2, 2, 32, "sine", std::string("a = 0.3\nb = 0.2\nc = 0.1\n") + buf,
                               0.2, 0.01, "enabled = geodesic_ball, B2h\nb2h_barrier = sec\n"));
  const auto* rep = report(r, "geodesic_ball");
  if (!rep) return {false, "report missing (exit " + std::to_string(r.exit_code) + ")"};
  const double max_rho = series_max(*rep->find("max_rho"));
  const double init = rep->metadata.value("initial_max_rho", kNaN);
  const bool ok = rep->verdict == grassflow::monitors::Verdict::pass && max_rho < kCriticalRadius &&
                  std::abs(init - 0.9 * kCriticalRadius) <= 1e-9;
  return {ok, "initial max rho " + g(init) + ", run max " + g(max_rho) + " < " +
                  g(kCriticalRadius)};
}

Outcome c12_hemisphere() {
  const auto& r = run("hemisphere", flow_ini("flow", 2, 2, 32, "hemisphere_test", "", 0.2, 0.01,
                                             "enabled = hemisphere\n"));
  const auto* rep = report(r, "hemisphere");
  if (!rep) return {false, "report missing (exit " + std::to_string(r.exit_code) + ")"};
  const double m1 = rep->metadata.value("run_min1", kNaN);
  const double m2 = rep->metadata.value("run_min2", kNaN);
  const bool ok = rep->verdict == grassflow::monitors::Verdict::pass && m1 > 0.0 && m2 > 0.0;
  return {ok, "min <gamma1,u1> " + g(m1) + ", min <gamma2,u2> " + g(m2)};
}

Outcome c13_b2h() {
  struct Item {
    std::string name;
    Family fam;
    std::string barrier;
  };
  char buf[64];
  std::snprintf(buf, sizeof buf, "target_max_rho = %.17g\n", 0.9 * kCriticalRadius);
  const std::vector<Item> items = {
      {"b2h_sine", kConfinable[0], "v32"},
      {"b2h_random1", kConfinable[2], "v32"},
      {"b2h_ball", {"", 2, 2, "sine", std::string("a = 0.3\nb = 0.2\nc = 0.1\n") + buf}, "sec"},
  };
  bool ok = true;
  std::string detail;
  for (const Item& it : items) {
    const auto& r = run(it.name, flow_ini("report", it.fam.n, it.fam.m, 32, it.fam.preset,
                                          it.fam.params, 0.2, 0.01,
                                          "enabled = B2h\nb2h_barrier = " + it.barrier + "\n"));
    const json* e = refinement(r, "B2h");
    if (!e) {
      ok = false;
      detail += it.name + ": missing; ";
      continue;
    }
    const double ic = (*e)["coarse_max_relative_increase"].get<double>();
    const double iv = (*e)["fine_max_relative_increase"].get<double>();
    const bool pass = coarse_verdict(r, "B2h") == "pass" && ic <= kB2hRel && iv <= kB2hRel &&
                      iv <= ic + 1e-12;
    ok = ok && pass;
    detail += it.name.substr(4) + "(" + it.barrier + ") " + g(ic) + "->" + g(iv) +
              (pass ? "" : " FAILED") + "; ";
  }
  return {ok, detail + "max relative increase per interval, N=32 -> 64, limit " + g(kB2hRel)};
}

Outcome c14_curvature_scaling() {
  const std::vector<Family> family = {kConfinable[0], kConfinable[1], kConfinable[2]};
  bool ok = true;
  std::string detail;
  for (const Family& f : family) {
    const std::string name = "cemp_" + f.name.substr(11);
    const auto& r = run(name, flow_ini("report", f.n, f.m, 64, f.preset, f.params, 0.2, 0.02,
                                       "enabled = curvature_scaling\ntheta = 0.5\n"));
    const json* e = refinement(r, "curvature_scaling");
    if (!e || !r.manifest.contains("C_emp_max")) {
      ok = false;
      detail += name + ": missing; ";
      continue;
    }
    const double var = (*e)["relative_variation"].get<double>();
    const double c = r.manifest["C_emp_max"].get<double>();
    const bool pass = std::isfinite(c) && c > 0.0 && var < kCempVariation;
    ok = ok && pass;
    detail += name.substr(5) + " " + g((*e)["coarse_C_emp_max"].get<double>()) + "/" +
              g((*e)["fine_C_emp_max"].get<double>()) + (pass ? "" : " FAILED") + "; ";
  }
  return {ok, detail + "C_emp max at N=64/128, allowed variation " + g(kCempVariation)};
}

Outcome c15_determinism() {
  bool ok = true;
  std::string detail;
  int compared = 0;
  for (auto& [name, s] : scenarios) {
    const gc::ScenarioResult again = gc::run_scenario(config_of(s, "second"));
    for (const char* file : {"series.csv", "series_coarse.csv", "checks.csv"}) {
      const fs::path a = s.result.output_dir / file;
      if (!fs::exists(a)) continue;
      ++compared;
      if (slurp(a) != slurp(again.output_dir / file)) {
        ok = false;
        detail += name + "/" + file + " differs; ";
      }
    }
    if (again.exit_code != s.result.exit_code) {
      ok = false;
      detail += name + " exit status differs; ";
    }
  }
  return {ok, detail + std::to_string(compared) + " output files from " +
                  std::to_string(scenarios.size()) + " scenarios byte-identical on rerun"};
}

}  // namespace

int main() {
  unsetenv(gc::kOutputDirEnv);
  fs::create_directories(kRoot);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Hessian closed form vs finite-difference oracle", c01_hessian},
      {"convexity gap of v on the closed sub-level set {v <= 2}",
       [] { return kernel_scan("convexity_gap", 10000); }},
      {"Hessian bound of the barrier (v/(2-v))^{3/2}",
       [] { return kernel_scan("v32_hessian_bound", 10000); }},
      {"positive-definiteness boundary of Hess(v)", c04_definiteness},
      {"sub-level set {v < 2} inside the convex region",
       [] { return kernel_scan("sublevel_inclusion", 10000); }},
      {"geodesic distance vs shooting", c06_distance},
      {"grim reaper regression", c07_grim_reaper},
      {"evolution identity of |F|^2", [] { return identity("F2_identity"); }},
      {"composition identity with barrier v", [] { return identity("composition_identity"); }},
      {"confinable property of {Delta_f < 2}", c10_confinable},
      {"Gauss image stays in the critical geodesic ball", c11_geodesic_ball},
      {"hemisphere preservation of the partial Gauss maps", c12_hemisphere},
      {"sup |B|^2 h non-increasing", c13_b2h},
      {"curvature estimate constant stable under refinement", c14_curvature_scaling},
      {"determinism of every scenario", c15_determinism},
  };

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o{false, ""};
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu  %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
