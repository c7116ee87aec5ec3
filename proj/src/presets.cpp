/// @file presets.cpp
/// @brief Deterministic initial data for the graphical flow.

#include "grassflow/errors.hpp"
#include "grassflow/graph_mcf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <string>

namespace grassflow::mcf {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys = {
      "target_sup_delta_f", "target_max_rho", "require_delta_below_two"};
  return keys;
}

double param(const Params& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

GraphState blank_state(const GridSpec& spec) {
  GraphState s;
  s.spec = spec;
  if (s.spec.origin.empty()) s.spec.origin.assign(spec.n, 0.0);
  s.f.assign(spec.node_count() * spec.m, 0.0);
  s.tilt = Matrix::Zero(spec.n, spec.m);
  return s;
}

Vector node_coords(const GridSpec& spec, std::size_t k) {
  Vector x(spec.n);
  for (int i = 0; i < spec.n; ++i) x(i) = spec.coord(k, i);
  return x;
}

double phase(const GridSpec& spec, const Vector& x, int axis) {
  return kTwoPi * x(axis) / spec.period[axis];
}

GraphState make_affine(const Params& p, const GridSpec& spec) {
  GraphState s = blank_state(spec);
  for (int i = 0; i < spec.n; ++i)
    for (int a = 0; a < spec.m; ++a)
      s.tilt(i, a) = param(p, "slope_" + std::to_string(i + 1) + "_" +
                                  std::to_string(a + 1), 0.0);
  for (std::size_t k = 0; k < spec.node_count(); ++k) {
    const Vector x = node_coords(s.spec, k);
    for (int a = 0; a < spec.m; ++a) {
      double val = param(p, "offset_" + std::to_string(a + 1), 0.0);
      for (int i = 0; i < spec.n; ++i) val += s.tilt(i, a) * x(i);
      s.f[k * spec.m + a] = val;
    }
  }
  return s;
}

GraphState make_sine(const Params& p, const GridSpec& spec) {
  GraphState s = blank_state(spec);
  const double a = param(p, "a", 0.5);
  const double b = param(p, "b", 0.0);
  const double c = param(p, "c", 0.0);
  const double mode = param(p, "k", 1.0);
  const int last = spec.n - 1;
  for (std::size_t k = 0; k < spec.node_count(); ++k) {
    const Vector x = node_coords(s.spec, k);
    const double p1 = phase(s.spec, x, 0);
    const double pn = phase(s.spec, x, last);
    s.f[k * spec.m] = a * std::sin(mode * p1) + c * std::sin(p1 + pn);
    if (spec.m >= 2) s.f[k * spec.m + 1] = b * std::sin(mode * pn);
    if (spec.m >= 3) s.f[k * spec.m + 2] = b * std::cos(mode * p1);
  }
  return s;
}

GraphState make_grim_reaper(const Params& p, const GridSpec& spec) {
  if (spec.n != 1) throw ValidationError("preset grim_reaper needs n = 1");
  const double delta = param(p, "delta", 0.3);
  if (!(delta > 0.0 && delta < std::numbers::pi / 2.0)) {
    throw ValidationError("preset grim_reaper: delta must be in (0, pi/2)");
  }
  GridSpec window = spec;
  const int nodes = spec.cells[0];
  const double h = (std::numbers::pi - 2.0 * delta) / (nodes - 1);
  window.origin = {-std::numbers::pi / 2.0 + delta};
  window.period = {h * nodes};
  GraphState s = blank_state(window);
  for (std::size_t k = 0; k < window.node_count(); ++k) {
    s.f[k * spec.m] = -std::log(std::cos(window.coord(k, 0)));
  }
  const int m = spec.m;
  auto clamp = std::make_shared<BoundaryClamp>();
  clamp->value = [m](const Vector& x, double t) {
    Vector out = Vector::Zero(m);
    out(0) = -std::log(std::cos(x(0))) + t;
    return out;
  };
  s.clamp = std::move(clamp);
  return s;
}

GraphState make_random_smooth(const Params& p, const GridSpec& spec) {
  GraphState s = blank_state(spec);
  const auto seed = static_cast<std::uint64_t>(param(p, "seed", 0.0));
  const int modes = static_cast<int>(param(p, "modes", 2.0));
  const double max_slope = param(p, "max_slope", 0.5);
  if (modes < 1 || modes > 8) throw ValidationError("preset random_smooth: modes in 1..8");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  struct Wave {
    std::vector<int> k;
    double cos_coef, sin_coef;
  };
  std::vector<std::vector<Wave>> waves(spec.m);
  std::vector<int> k(spec.n, -modes);
  for (;;) {
    // Half space: first nonzero component positive.
    int first = 0;
    for (int v : k) {
      if (v != 0) {
        first = v;
        break;
      }
    }
    if (first > 0) {
      double k2 = 0.0;
      for (int v : k) k2 += v * v;
      const double weight = 1.0 / (1.0 + k2);
      for (int a = 0; a < spec.m; ++a) {
        const double cc = weight * unit(rng);
        const double ss = weight * unit(rng);
        waves[a].push_back({k, cc, ss});
      }
    }
    int axis = 0;
    while (axis < spec.n && ++k[axis] > modes) {
      k[axis] = -modes;
      ++axis;
    }
    if (axis == spec.n) break;
  }

  for (std::size_t node = 0; node < spec.node_count(); ++node) {
    const Vector x = node_coords(s.spec, node);
    for (int a = 0; a < spec.m; ++a) {
      double val = 0.0;
      for (const Wave& w : waves[a]) {
        double arg = 0.0;
        for (int i = 0; i < spec.n; ++i) arg += w.k[i] * phase(s.spec, x, i);
        val += w.cos_coef * std::cos(arg) + w.sin_coef * std::sin(arg);
      }
      s.f[node * spec.m + a] = val;
    }
  }

  double slope = 0.0;
  for (std::size_t node = 0; node < spec.node_count(); ++node) {
    const NodeJet jet = jet_at(s, node);
    Eigen::JacobiSVD<Matrix> svd(jet.df);
    slope = std::max(slope, svd.singularValues()(0));
  }
  if (slope > 0.0) {
    for (double& v : s.f) v *= max_slope / slope;
  }
  return s;
}

GraphState make_hemisphere(const Params& p, const GridSpec& spec) {
  if (spec.n != 2 || spec.m != 2) {
    throw ValidationError("preset hemisphere_test needs n = m = 2");
  }
  GraphState s = blank_state(spec);
  const double a = param(p, "a", 0.9);
  const double c = param(p, "c", 0.0);
  for (std::size_t k = 0; k < spec.node_count(); ++k) {
    const Vector x = node_coords(s.spec, k);
    const double p1 = phase(s.spec, x, 0);
    const double p2 = phase(s.spec, x, 1);
    s.f[k * 2] = a * std::sin(p1) + c * std::sin(p2);
    s.f[k * 2 + 1] = a * std::sin(p2) - c * std::sin(p1);
  }
  return s;
}

GraphState scaled(const GraphState& s, double factor) {
  GraphState out = s;
  for (double& v : out.f) v *= factor;
  out.tilt *= factor;
  return out;
}

// Bisection on a global scale factor for a quantity increasing in it.
template <class Measure>
GraphState rescale_to(const GraphState& base, double target, Measure measure,
                      const std::string& what) {
  if (!(measure(scaled(base, 0.0)) < target)) {
    throw ValidationError("cannot reach " + what + " = " + std::to_string(target) +
                          ": flat data already exceeds it");
  }
  double lo = 0.0;
  double hi = 1.0;
  int grow = 0;
  while (!(measure(scaled(base, hi)) > target)) {
    hi *= 2.0;
    if (++grow > 60) {
      throw ValidationError("cannot reach " + what + " = " + std::to_string(target) +
                            " by rescaling the preset");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (measure(scaled(base, mid)) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return scaled(base, lo);
}

}  // namespace

const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog = {
      {"affine",
       {{"slope_I_A", 0.0}, {"offset_A", 0.0}},
       "f(x) = S x + c; S stored as the grid tilt, so the graph is a plane",
       "stationary solutions; exactness of every residual monitor"},
      {"sine",
       {{"a", 0.5}, {"b", 0.0}, {"c", 0.0}, {"k", 1.0}},
       "f^1 = a sin(k x1) + c sin(x1 + xn), f^2 = b sin(k xn), "
       "f^3 = b cos(k x1) (phases scaled by 2 pi / L)",
       "maximum principle for Delta_f, evolution identities, "
       "monotonicity of sup |B|^2 h"},
      {"grim_reaper",
       {{"delta", 0.3}},
       "f^1 = -log cos x on (-pi/2 + delta, pi/2 - delta), end nodes clamped "
       "to the translating soliton (n = 1)",
       "convergence of the solver against an exact translating solution"},
      {"random_smooth",
       {{"seed", 0.0}, {"modes", 2.0}, {"max_slope", 0.5}},
       "seeded low-frequency Fourier data scaled to sup |Df| = max_slope",
       "confinable property of {Delta_f < 2} and interior curvature "
       "estimates on generic data"},
      {"hemisphere_test",
       {{"a", 0.9}, {"c", 0.0}},
       "f = (a sin x1 + c sin x2, a sin x2 - c sin x1), n = m = 2",
       "preservation of the hemisphere containing the partial Gauss images "
       "of a surface in R^4"},
  };
  return catalog;
}

bool preset_exists(const std::string& name) {
  const auto& cat = preset_catalog();
  return std::any_of(cat.begin(), cat.end(),
                     [&](const PresetInfo& p) { return p.name == name; });
}

bool preset_accepts(const std::string& name, const std::string& key, int n, int m) {
  if (common_keys().count(key)) return preset_exists(name);
  if (name == "affine") {
    for (int a = 1; a <= m; ++a) {
      if (key == "offset_" + std::to_string(a)) return true;
      for (int i = 1; i <= n; ++i)
        if (key == "slope_" + std::to_string(i) + "_" + std::to_string(a)) return true;
    }
    return false;
  }
  for (const PresetInfo& p : preset_catalog()) {
    if (p.name == name) return p.defaults.count(key) > 0;
  }
  return false;
}

GraphState init_preset(const std::string& name, const Params& params,
                       const GridSpec& spec) {
  spec.validate();

  if (!preset_exists(name)) throw ValidationError("unknown preset '" + name + "'");
  for (const auto& [key, value] : params) {
    if (!preset_accepts(name, key, spec.n, spec.m)) {
      throw ValidationError("preset '" + name + "': unknown parameter '" + key + "'");
    }
    if (!std::isfinite(value)) {
      throw ValidationError("preset '" + name + "': parameter '" + key +
                            "' is not finite");
    }
  }

  GraphState s;
  if (name == "affine") {
    s = make_affine(params, spec);
  } else if (name == "sine") {
    s = make_sine(params, spec);
  } else if (name == "grim_reaper") {
    s = make_grim_reaper(params, spec);
  } else if (name == "random_smooth") {
    s = make_random_smooth(params, spec);
  } else {
    s = make_hemisphere(params, spec);
  }

  const bool want_delta = params.count("target_sup_delta_f") > 0;
  const bool want_rho = params.count("target_max_rho") > 0;
  if (want_delta && want_rho) {
    throw ValidationError("give at most one of target_sup_delta_f, target_max_rho");
  }
  if ((want_delta || want_rho) && s.clamp) {
    throw ValidationError("preset '" + name + "' cannot be rescaled");
  }
  if (want_delta) {
    s = rescale_to(s, params.at("target_sup_delta_f"),
                   [](const GraphState& st) { return sup_delta_f(st); },
                   "sup Delta_f");
  } else if (want_rho) {
    s = rescale_to(s, params.at("target_max_rho"),
                   [](const GraphState& st) { return max_gauss_rho(st); },
                   "max rho");
  }
  if (param(params, "require_delta_below_two", 0.0) != 0.0) {
    const double sup = sup_delta_f(s);
    if (!(sup < 2.0)) {
      throw ValidationError("preset '" + name + "' violates Delta_f < 2: sup Delta_f = " +
                            std::to_string(sup));
    }
  }
  return s;
}

double sup_delta_f(const GraphState& s) {
  double out = 0.0;
  const int n = s.spec.n;
  for (std::size_t k = 0; k < s.spec.node_count(); ++k) {
    const NodeJet jet = jet_at(s, k);
    const Matrix g = Matrix::Identity(n, n) + jet.df * jet.df.transpose();
    out = std::max(out, std::sqrt(g.determinant()));
  }
  return out;
}

double max_gauss_rho(const GraphState& s) {
  double out = 0.0;
  for (std::size_t k = 0; k < s.spec.node_count(); ++k) {
    const NodeJet jet = jet_at(s, k);
    out = std::max(out, grassmann::rho_of(grassmann::GrassmannPoint(jet.df)));
  }
  return out;
}

}  // namespace grassflow::mcf
