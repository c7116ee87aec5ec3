/// @file monitors.cpp
/// @brief Evolution identities and maximum-principle monitors.

#include "grassflow/monitors.hpp"

#include "grassflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace grassflow::monitors {

using grassmann::GrassmannPoint;
using grassmann::Matrix;
using grassmann::TangentVector;
using grassmann::Vector;
using mcf::GraphState;
using mcf::GridSpec;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Field = std::vector<double>;

std::vector<double> times_of(const Series& s) {
  std::vector<double> t;
  t.reserve(s.size());
  for (const auto& fr : s) t.push_back(fr.state.t);
  return t;
}

void require_frames(const Series& s, std::size_t count, const std::string& who) {
  if (s.size() < count) {
    throw PreconditionError(who + ": needs at least " + std::to_string(count) +
                            " snapshots, got " + std::to_string(s.size()));
  }
}

double max_interval(const std::vector<double>& t) {
  double out = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) out = std::max(out, t[k] - t[k - 1]);
  return out;
}

double max_cell(const GridSpec& spec) {
  double out = 0.0;
  for (int i = 0; i < spec.n; ++i) out = std::max(out, spec.h(i));
  return out;
}

MonitorReport start_report(const std::string& name, const Series& s) {
  MonitorReport r;
  r.name = name;
  r.times = times_of(s);
  if (s.empty()) return r;
  const GridSpec& spec = s.front().state.spec;
  r.metadata["n"] = spec.n;
  r.metadata["m"] = spec.m;
  r.metadata["cells"] = spec.cells;
  r.metadata["period"] = spec.period;
  r.metadata["snapshots"] = s.size();
  r.metadata["h_max"] = max_cell(spec);
  r.metadata["snapshot_interval_max"] = max_interval(r.times);
  return r;
}

// Distance of `node` from the domain center, squared.
double center_dist2(const GridSpec& spec, std::size_t node) {
  double r2 = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    const double d = spec.coord(node, i) - spec.center(i);
    r2 += d * d;
  }
  return r2;
}

// Nodes where the heat operator of a field is meaningful. Fields that are not
// periodic lose `margin` cells next to the seam; clamped states always lose
// the clamped end nodes and their neighbors.
std::vector<char> usable_nodes(const GraphState& st, bool periodic_field, int margin) {
  const GridSpec& spec = st.spec;
  std::vector<char> ok(spec.node_count(), 1);
  for (std::size_t k = 0; k < ok.size(); ++k) {
    for (int i = 0; i < spec.n; ++i) {
      const int idx = spec.index_along(k, i);
      const int last = spec.cells[i] - 1;
      int need = periodic_field ? 0 : margin;
      if (st.clamp && i == 0) need = std::max(need, 2);
      if (idx < need || idx > last - need) ok[k] = 0;
    }
  }
  return ok;
}

// Per-frame semi-discrete velocity d_t f.
std::vector<Field> velocities(const Series& s) {
  std::vector<Field> out;
  out.reserve(s.size());
  for (const auto& fr : s) out.push_back(mcf::mcf_velocity(fr.state));
  return out;
}

// c^i = g^{ij} <d_j f, d_t f> at one node.
Vector tangential(const mcf::Frame& fr, const Field& vel, std::size_t k) {
  const int m = fr.state.spec.m;
  const Eigen::Map<const Vector> v(&vel[k * m], m);
  return fr.geometry.inv_g(k) * (fr.geometry.gauss_z(k) * v);
}

TimeStencil stencil_or_throw(const std::vector<double>& t, std::size_t k) {
  return time_stencil(t, k);
}

// (d_param - Delta) q at every node of snapshot k.
Field heat_operator(const Series& s, const std::vector<Field>& q,
                    const std::vector<Field>& vel, const std::vector<double>& t,
                    std::size_t k) {
  const mcf::Frame& fr = s[k];
  const TimeStencil ts = stencil_or_throw(t, k);
  const Field lap = mcf::laplace_beltrami(fr.state, q[k]);
  const std::size_t count = fr.state.spec.node_count();
  Field out(count);
  for (std::size_t node = 0; node < count; ++node) {
    double dtq = 0.0;
    for (int j = 0; j < 3; ++j) dtq += ts.w[j] * q[ts.idx[j]][node];
    const Vector c = tangential(fr, vel[k], node);
    const Vector grad = mcf::field_gradient(fr.state, q[k], node);
    out[node] = dtq - c.dot(grad) - lap[node];
  }
  return out;
}

double masked_max_abs(const Field& r, const std::vector<char>& mask) {
  double out = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k)
    if (mask[k]) out = std::max(out, std::abs(r[k]));
  return out;
}

double series_max(const std::vector<double>& v) {
  double out = -std::numeric_limits<double>::infinity();
  for (double x : v) out = std::max(out, x);
  return out;
}

double series_min(const std::vector<double>& v) {
  double out = std::numeric_limits<double>::infinity();
  for (double x : v) out = std::min(out, x);
  return out;
}

// Largest relative increase between consecutive entries; `floor` guards
// entries that are zero.
double max_relative_increase(const std::vector<double>& v, double floor = 1e-300) {
  double out = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double base = std::max(std::abs(v[k - 1]), floor);
    out = std::max(out, (v[k] - v[k - 1]) / base);
  }
  return out;
}

// Barrier field along the Gauss map; NaN outside its domain.
Field barrier_field(const mcf::Frame& fr, Barrier b) {
  switch (b) {
    case Barrier::v:
      return fr.geometry.v_tilde;
    case Barrier::v32:
      return fr.geometry.h_v32;
    case Barrier::sec:
      return fr.geometry.h_sec;
  }
  return {};
}

double barrier_hessian(const GrassmannPoint& p, Barrier b, const TangentVector& x) {
  switch (b) {
    case Barrier::v:
      return grassmann::hess_v(p, x);
    case Barrier::v32:
      return grassmann::hess_barrier_v32(p, x);
    case Barrier::sec:
      return grassmann::hess_barrier_sec(p, x);
  }
  return kNaN;
}

// sum_i Hess(h)(gamma_* e_i, gamma_* e_i) with e_i = g^{-1/2} d_i.
double hessian_trace(const mcf::Frame& fr, std::size_t node, Barrier b) {
  const GraphState& st = fr.state;
  const int n = st.spec.n;
  const int m = st.spec.m;
  const mcf::NodeJet jet = mcf::jet_at(st, node);
  const GrassmannPoint p(jet.df);
  const Matrix g = fr.geometry.g(node);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Matrix inv_half = es.operatorInverseSqrt();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    Matrix y = Matrix::Zero(n, m);
    for (int k = 0; k < n; ++k) {
      // d_k of the Gauss map: entries d_j d_k f^alpha
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < m; ++a) y(j, a) += inv_half(i, k) * jet.d2f(j * n + k, a);
    }
    total += barrier_hessian(p, b, TangentVector{y});
  }
  return total;
}

// First snapshot whose barrier field leaves the domain, or -1.
long first_outside(const Series& s, Barrier b) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (double x : barrier_field(s[k], b))
      if (!std::isfinite(x)) return static_cast<long>(k);
  }
  return -1;
}

MonitorReport barrier_violation(MonitorReport r, Barrier b, long k) {
  r.verdict = Verdict::fail;
  r.metadata["first_offending_snapshot"] = k;
  r.note = "Gauss image left the domain of the " + to_string(b) + " barrier";
  return r;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::informational:
      return "informational";
  }
  return "?";
}

std::string to_string(Barrier b) {
  switch (b) {
    case Barrier::v:
      return "v";
    case Barrier::v32:
      return "v32";
    case Barrier::sec:
      return "sec";
  }
  return "?";
}

Barrier parse_barrier(const std::string& name) {
  if (name == "v") return Barrier::v;
  if (name == "v32") return Barrier::v32;
  if (name == "sec") return Barrier::sec;
  throw ValidationError("unknown barrier '" + name + "' (expected v, v32 or sec)");
}

const std::vector<double>* MonitorReport::find(const std::string& key) const {
  for (const auto& [name, values] : series)
    if (name == key) return &values;
  return nullptr;
}

nlohmann::ordered_json MonitorReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["verdict"] = to_string(verdict);
  j["tolerance"] = tolerance;
  j["note"] = note;
  j["metadata"] = metadata;
  j["times"] = times;
  nlohmann::ordered_json ser = nlohmann::ordered_json::object();
  for (const auto& [key, values] : series) ser[key] = values;
  j["series"] = ser;
  return j;
}

TimeStencil time_stencil(const std::vector<double>& times, std::size_t k) {
  const std::size_t count = times.size();
  if (count < 3) throw PreconditionError("time derivative needs three snapshots");
  std::size_t first = k == 0 ? 0 : k - 1;
  if (first + 2 >= count) first = count - 3;
  TimeStencil ts{};
  const double t = times[k];
  for (int j = 0; j < 3; ++j) ts.idx[j] = static_cast<int>(first + j);
  for (int j = 0; j < 3; ++j) {
    const double tj = times[first + j];
    double denom = 1.0;
    for (int l = 0; l < 3; ++l)
      if (l != j) denom *= tj - times[first + l];
    double numer = 0.0;
    for (int q = 0; q < 3; ++q) {
      if (q == j) continue;
      double prod = 1.0;
      for (int l = 0; l < 3; ++l)
        if (l != j && l != q) prod *= t - times[first + l];
      numer += prod;
    }
    ts.w[j] = numer / denom;
  }
  return ts;
}

MonitorReport check_F2_identity(const Series& s, const ResidualOptions& opt) {
  require_frames(s, 3, "check_F2_identity");
  MonitorReport r = start_report("F2_identity", s);
  const GridSpec& spec = s.front().state.spec;
  const int n = spec.n;
  const int m = spec.m;

  std::vector<Field> q;
  for (const auto& fr : s) {
    Field f2(spec.node_count());
    for (std::size_t k = 0; k < f2.size(); ++k) {
      double acc = center_dist2(spec, k);
      for (int a = 0; a < m; ++a) acc += fr.state.value(k, a) * fr.state.value(k, a);
      f2[k] = acc;
    }
    q.push_back(std::move(f2));
  }
  const std::vector<Field> vel = velocities(s);
  std::vector<double> res;
  for (std::size_t k = 0; k < s.size(); ++k) {
    Field h = heat_operator(s, q, vel, r.times, k);
    for (double& x : h) x += 2.0 * n;
    res.push_back(masked_max_abs(h, usable_nodes(s[k].state, false, opt.seam_margin)));
  }
  const double hmax = max_cell(spec);
  r.tolerance = opt.tau_constant * (hmax * hmax + max_interval(r.times));
  r.series.emplace_back("residual_max", res);
  r.metadata["residual_max"] = series_max(res);
  r.metadata["tau_constant"] = opt.tau_constant;
  r.verdict = series_max(res) <= r.tolerance ? Verdict::pass : Verdict::fail;
  return r;
}

MonitorReport check_composition_identity(const Series& s, Barrier barrier,
                                         const ResidualOptions& opt) {
  require_frames(s, 3, "check_composition_identity");
  MonitorReport r = start_report("composition_identity_" + to_string(barrier), s);
  r.metadata["barrier"] = to_string(barrier);
  const GridSpec& spec = s.front().state.spec;
  const double hmax = max_cell(spec);
  r.tolerance = opt.tau_constant * (hmax * hmax + max_interval(r.times));
  if (const long bad = first_outside(s, barrier); bad >= 0) {
    return barrier_violation(r, barrier, bad);
  }

  std::vector<Field> q;
  std::vector<Field> q_alt;
  for (const auto& fr : s) {
    q.push_back(barrier_field(fr, barrier));
    q_alt.push_back(fr.geometry.sqrt_det_g);
  }
  const std::vector<Field> vel = velocities(s);
  std::vector<double> res;
  double two_path = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Field lhs = heat_operator(s, q, vel, r.times, k);
    const std::vector<char> mask = usable_nodes(s[k].state, true, opt.seam_margin);
    Field total(lhs.size());
    for (std::size_t node = 0; node < lhs.size(); ++node) {
      total[node] = mask[node] ? lhs[node] + hessian_trace(s[k], node, barrier) : 0.0;
    }
    res.push_back(masked_max_abs(total, mask));
    if (barrier == Barrier::v) {
      const Field alt = heat_operator(s, q_alt, vel, r.times, k);
      for (std::size_t node = 0; node < lhs.size(); ++node)
        if (mask[node]) two_path = std::max(two_path, std::abs(lhs[node] - alt[node]));
    }
  }
  r.series.emplace_back("residual_max", res);
  r.metadata["residual_max"] = series_max(res);
  r.metadata["tau_constant"] = opt.tau_constant;
  bool ok = series_max(res) <= r.tolerance;
  if (barrier == Barrier::v) {
    // The fields agree to roundoff; differencing amplifies that by at most
    // sum_i 4/h_i^2 + 4/dt_min times the field size.
    double field_gap = 0.0;
    double field_max = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
      for (std::size_t node = 0; node < q[k].size(); ++node) {
        field_gap = std::max(field_gap, std::abs(q[k][node] - q_alt[k][node]));
        field_max = std::max(field_max, std::abs(q[k][node]));
      }
    double dt_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < r.times.size(); ++k)
      dt_min = std::min(dt_min, r.times[k] - r.times[k - 1]);
    double amplification = 4.0 / dt_min;
    for (int i = 0; i < spec.n; ++i) amplification += 4.0 / (spec.h(i) * spec.h(i));
    const double lhs_tol = 1e-12 * std::max(1.0, field_max * amplification);
    r.metadata["two_path_field_difference"] = field_gap;
    r.metadata["two_path_max_difference"] = two_path;
    r.metadata["two_path_tolerance"] = lhs_tol;
    if (!(field_gap <= 1e-12 * field_max) || !(two_path <= lhs_tol)) {
      ok = false;
      r.note = "left side from v(Df) and from sqrt(det g) disagree";
    }
  }
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  return r;
}

MonitorReport check_B2_inequality(const Series& s, const B2Options& opt) {
  require_frames(s, 3, "check_B2_inequality");
  MonitorReport r = start_report("B2_inequality", s);
  const GridSpec& spec = s.front().state.spec;
  const int n = spec.n;
  const int d = n + spec.m;

  std::vector<Field> q;
  for (const auto& fr : s) q.push_back(fr.geometry.b2);
  const std::vector<Field> vel = velocities(s);

  std::vector<double> slack_min;
  std::vector<double> kato_max;
  long kato_violations = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const mcf::Frame& fr = s[k];
    const auto& geo = fr.geometry;
    const Field heat = heat_operator(s, q, vel, r.times, k);
    const std::vector<char> mask = usable_nodes(fr.state, true, 2);
    const double b2_scale = *std::max_element(geo.b2.begin(), geo.b2.end());

    Field grad_abs(heat.size(), 0.0);
    Field grad_full(heat.size(), 0.0);
    for (std::size_t node = 0; node < heat.size(); ++node) {
      if (!mask[node]) continue;
      const Matrix gi = geo.inv_g(node);
      const Vector db = mcf::field_gradient(fr.state, q[k], node);
      const double b2 = geo.b2[node];
      if (b2 > 1e-12 * b2_scale && b2 > 0.0) {
        grad_abs[node] = db.dot(gi * db) / (4.0 * b2);
      }

      // Normal-bundle covariant derivative of B.
      const mcf::NodeJet jet = mcf::jet_at(fr.state, node);
      const Matrix z = jet.df;
      Matrix tangent(d, n);
      tangent.topRows(n).setIdentity();
      tangent.bottomRows(spec.m) = z.transpose();
      const Matrix proj = Matrix::Identity(d, d) - tangent * gi * tangent.transpose();
      // gamma(l, a, i) = Gamma^l_{ai}
      std::vector<double> gam(n * n * n, 0.0);
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) {
          const Vector fai = jet.d2f.row(a * n + i).transpose();
          const Vector low = z * fai;  // <f_p, f_ai>
          const Vector up = gi * low;
          for (int l = 0; l < n; ++l) gam[(l * n + a) * n + i] = up(l);
        }
      const auto bk = geo.B(node);
      std::vector<Vector> nab(n * n * n);
      for (int a = 0; a < n; ++a) {
        const std::size_t kp = spec.neighbor(node, a, 1, nullptr);
        const std::size_t km = spec.neighbor(node, a, -1, nullptr);
        const Matrix dB = (Matrix(geo.B(kp)) - Matrix(geo.B(km))) / (2.0 * spec.h(a));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            Vector t = proj * dB.col(i * n + j);
            for (int l = 0; l < n; ++l) {
              t -= gam[(l * n + a) * n + i] * bk.col(l * n + j);
              t -= gam[(l * n + a) * n + j] * bk.col(i * n + l);
            }
            nab[(a * n + i) * n + j] = t;
          }
      }
      double full = 0.0;
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int a2 = 0; a2 < n; ++a2)
              for (int i2 = 0; i2 < n; ++i2)
                for (int j2 = 0; j2 < n; ++j2)
                  full += gi(a, a2) * gi(i, i2) * gi(j, j2) *
                          nab[(a * n + i) * n + j].dot(nab[(a2 * n + i2) * n + j2]);
      grad_full[node] = full;
    }
    double smin = std::numeric_limits<double>::infinity();
    double kmax = -std::numeric_limits<double>::infinity();
    double full_scale = 0.0;
    for (std::size_t node = 0; node < heat.size(); ++node)
      if (mask[node]) full_scale = std::max(full_scale, grad_full[node]);
    for (std::size_t node = 0; node < heat.size(); ++node) {
      if (!mask[node]) continue;
      const double b2 = geo.b2[node];
      const double slack = -heat[node] - 2.0 * grad_abs[node] + 3.0 * b2 * b2;
      smin = std::min(smin, slack);
      const double excess = grad_abs[node] - grad_full[node];
      kmax = std::max(kmax, excess);
      if (excess > opt.kato_relative * full_scale + 1e-14) ++kato_violations;
    }
    slack_min.push_back(smin);
    kato_max.push_back(kmax);
  }
  r.series.emplace_back("slack_min", slack_min);
  r.series.emplace_back("kato_excess_max", kato_max);
  r.metadata["slack_min"] = series_min(slack_min);
  r.metadata["kato_excess_max"] = series_max(kato_max);
  r.metadata["kato_violations"] = kato_violations;
  if (opt.tau_loose) {
    r.tolerance = *opt.tau_loose;
    r.verdict = series_min(slack_min) >= -*opt.tau_loose ? Verdict::pass : Verdict::fail;
  } else {
    r.verdict = Verdict::informational;
    r.note = "no loose tolerance supplied; slack recorded only";
  }
  return r;
}

MonitorReport monitor_confinable(const Series& s, double relative) {
  require_frames(s, 1, "monitor_confinable");
  MonitorReport r = start_report("confinable", s);
  std::vector<double> sup;
  std::vector<double> inf;
  for (const auto& fr : s) {
    const auto& v = fr.geometry.sqrt_det_g;
    sup.push_back(*std::max_element(v.begin(), v.end()));
    inf.push_back(*std::min_element(v.begin(), v.end()));
  }
  if (!(sup.front() < 2.0)) {
    throw PreconditionError("monitor_confinable: initial sup Delta_f = " +
                            std::to_string(sup.front()) + " is not below 2");
  }
  r.tolerance = relative;
  r.series.emplace_back("sup_delta_f", sup);
  r.series.emplace_back("min_delta_f", inf);
  const double growth = max_relative_increase(sup);
  const bool below = series_max(sup) < 2.0;
  r.metadata["initial_sup"] = sup.front();
  r.metadata["max_sup"] = series_max(sup);
  r.metadata["margin_to_two"] = 2.0 - series_max(sup);
  r.metadata["max_relative_increase"] = growth;
  r.metadata["never_reaches_two"] = below;
  r.verdict = (below && growth <= relative) ? Verdict::pass : Verdict::fail;
  return r;
}

MonitorReport monitor_geodesic_ball(const Series& s, const GrassmannPoint& center,
                                    double R0, double tol) {
  require_frames(s, 1, "monitor_geodesic_ball");
  if (!(R0 > 0.0) || R0 > grassmann::kCriticalRadius * (1.0 + 1e-15)) {
    throw PreconditionError("monitor_geodesic_ball: R0 must be in (0, sqrt2 pi/4]");
  }
  MonitorReport r = start_report("geodesic_ball", s);
  const bool at_origin = center.z().cwiseAbs().maxCoeff() == 0.0;
  std::vector<double> max_rho;
  std::vector<double> sup_sec;
  for (const auto& fr : s) {
    double mr = 0.0;
    for (std::size_t k = 0; k < fr.geometry.nodes(); ++k) {
      const double rho =
          at_origin ? fr.geometry.rho[k]
                    : grassmann::rho_between(center, GrassmannPoint(fr.geometry.gauss_z(k)));
      mr = std::max(mr, rho);
    }
    max_rho.push_back(mr);
    if (mr < grassmann::kCriticalRadius) {
      const double c = std::cos(std::sqrt(2.0) * mr);
      sup_sec.push_back(1.0 / (c * c));
    } else {
      sup_sec.push_back(kNaN);
    }
  }
  if (!(max_rho.front() < R0)) {
    throw PreconditionError("monitor_geodesic_ball: initial max rho = " +
                            std::to_string(max_rho.front()) + " is not below R0 = " +
                            std::to_string(R0));
  }
  r.tolerance = tol;
  r.series.emplace_back("max_rho", max_rho);
  r.series.emplace_back("sup_sec2", sup_sec);
  r.metadata["R0"] = R0;
  r.metadata["center_z"] = std::vector<double>(center.z().data(),
                                               center.z().data() + center.z().size());
  r.metadata["initial_max_rho"] = max_rho.front();
  r.metadata["max_rho"] = series_max(max_rho);
  r.metadata["margin"] = R0 - series_max(max_rho);
  r.metadata["sup_sec2_max_relative_increase"] = max_relative_increase(sup_sec);
  r.verdict = series_max(max_rho) <= R0 + tol ? Verdict::pass : Verdict::fail;
  return r;
}

namespace {

using Vec3 = Eigen::Vector3d;

double min_dot(const std::vector<Vec3>& pts, const Vec3& u) {
  double out = std::numeric_limits<double>::infinity();
  for (const Vec3& p : pts) out = std::min(out, p.dot(u));
  return out;
}

// Maximin direction: Fibonacci candidates plus the mean, then a shrinking
// pattern search on the sphere.
Vec3 fit_hemisphere(const std::vector<Vec3>& pts, double* margin) {
  std::vector<Vec3> candidates;
  const int count = 2000;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double y = 1.0 - 2.0 * (k + 0.5) / count;
    const double rad = std::sqrt(1.0 - y * y);
    candidates.emplace_back(rad * std::cos(golden * k), y, rad * std::sin(golden * k));
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : pts) mean += p;
  if (mean.norm() > 0.0) candidates.push_back(mean.normalized());

  Vec3 best = candidates.front();
  double best_val = min_dot(pts, best);
  for (const Vec3& c : candidates) {
    const double val = min_dot(pts, c);
    if (val > best_val) {
      best_val = val;
      best = c;
    }
  }
  for (double stepsz = 0.05; stepsz > 1e-9; stepsz *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      Vec3 a = best.unitOrthogonal();
      Vec3 b = best.cross(a);
      for (const Vec3& dir : {a, Vec3(-a), b, Vec3(-b)}) {
        const Vec3 trial = (best + stepsz * dir).normalized();
        const double val = min_dot(pts, trial);
        if (val > best_val) {
          best_val = val;
          best = trial;
          moved = true;
          break;
        }
      }
    }
  }
  *margin = best_val;
  return best;
}

}  // namespace

MonitorReport monitor_hemisphere(const Series& s, double tol) {
  require_frames(s, 1, "monitor_hemisphere");
  const GridSpec& spec = s.front().state.spec;
  if (spec.n != 2 || spec.m != 2) {
    throw PreconditionError("monitor_hemisphere: needs n = m = 2");
  }
  MonitorReport r = start_report("hemisphere", s);
  std::vector<std::vector<Vec3>> g1(s.size()), g2(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (std::size_t node = 0; node < s[k].geometry.nodes(); ++node) {
      Matrix rows(2, 4);
      rows << Matrix::Identity(2, 2), s[k].geometry.gauss_z(node);
      const auto [a, b] = grassmann::s2xs2_split(grassmann::orthonormalize_rows(rows));
      g1[k].push_back(a);
      g2[k].push_back(b);
    }
  }
  double m1 = 0.0, m2 = 0.0;
  const Vec3 u1 = fit_hemisphere(g1.front(), &m1);
  const Vec3 u2 = fit_hemisphere(g2.front(), &m2);
  if (!(m1 > 0.0) || !(m2 > 0.0)) {
    throw PreconditionError("monitor_hemisphere: no open hemisphere contains the initial "
                            "partial Gauss images (fitted margins " +
                            std::to_string(m1) + ", " + std::to_string(m2) + ")");
  }
  std::vector<double> s1, s2;
  for (std::size_t k = 0; k < s.size(); ++k) {
    s1.push_back(min_dot(g1[k], u1));
    s2.push_back(min_dot(g2[k], u2));
  }
  r.tolerance = tol;
  r.series.emplace_back("min_dot_gamma1", s1);
  r.series.emplace_back("min_dot_gamma2", s2);
  r.metadata["u1"] = {u1(0), u1(1), u1(2)};
  r.metadata["u2"] = {u2(0), u2(1), u2(2)};
  r.metadata["initial_margin1"] = m1;
  r.metadata["initial_margin2"] = m2;
  r.metadata["run_min1"] = series_min(s1);
  r.metadata["run_min2"] = series_min(s2);
  const bool ok = series_min(s1) > -tol && series_min(s2) > -tol;
  if (std::min(m1, m2) < 1e-3) {
    r.verdict = Verdict::informational;
    r.note = "initial hemisphere margin below 1e-3; fit is degenerate";
  } else {
    r.verdict = ok ? Verdict::pass : Verdict::fail;
  }
  return r;
}

MonitorReport monitor_B2h(const Series& s, Barrier barrier, double relative) {
  require_frames(s, 1, "monitor_B2h");
  if (barrier == Barrier::v) throw ValidationError("monitor_B2h: barrier must be v32 or sec");
  MonitorReport r = start_report("B2h_" + to_string(barrier), s);
  r.metadata["barrier"] = to_string(barrier);
  r.tolerance = relative;
  if (const long bad = first_outside(s, barrier); bad >= 0) {
    return barrier_violation(r, barrier, bad);
  }
  std::vector<double> sup;
  for (const auto& fr : s) {
    const Field h = barrier_field(fr, barrier);
    double out = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) out = std::max(out, fr.geometry.b2[k] * h[k]);
    sup.push_back(out);
  }
  r.series.emplace_back("sup_b2_h", sup);
  const double growth = max_relative_increase(sup, 1e-300);
  r.metadata["max_relative_increase"] = growth;
  r.metadata["initial_sup"] = sup.front();
  r.metadata["final_sup"] = sup.back();
  r.verdict = growth <= relative ? Verdict::pass : Verdict::fail;
  return r;
}

MonitorReport monitor_curvature_scaling(const Series& s, double theta, double R,
                                        std::optional<double> bound) {
  require_frames(s, 1, "monitor_curvature_scaling");
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw PreconditionError("monitor_curvature_scaling: theta must be in [0, 1)");
  }
  if (!(R > 0.0)) throw PreconditionError("monitor_curvature_scaling: R must be positive");
  MonitorReport r = start_report("curvature_scaling", s);
  const GridSpec& spec = s.front().state.spec;
  const double inner = theta * R;
  std::vector<double> c_emp, num, den;
  double running = 0.0;  // sup_{s <= t} sup_{K(s,R)} (2 - Delta)^{-3}
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& geo = s[k].geometry;
    double sup_in = 0.0;
    for (std::size_t node = 0; node < geo.nodes(); ++node) {
      const double r2 = center_dist2(spec, node);
      if (r2 < R * R) {
        const double delta = geo.sqrt_det_g[node];
        if (!(delta < 2.0)) {
          throw PreconditionError("monitor_curvature_scaling: Delta_f >= 2 inside K(t, R) "
                                  "at snapshot " + std::to_string(k));
        }
        running = std::max(running, std::pow(2.0 - delta, -3.0));
      }
      if (r2 < inner * inner) sup_in = std::max(sup_in, geo.b2[node]);
    }
    const double t = s[k].state.t;
    num.push_back(sup_in);
    den.push_back(running);
    if (t <= 0.0) {
      c_emp.push_back(0.0);
    } else {
      const double scale =
          std::pow(1.0 - theta * theta, -2.0) * (1.0 / t + 1.0 / (R * R)) * running;
      c_emp.push_back(sup_in / scale);
    }
  }
  r.series.emplace_back("C_emp", c_emp);
  r.series.emplace_back("sup_b2_inner", num);
  r.series.emplace_back("sup_barrier_outer", den);
  r.metadata["theta"] = theta;
  r.metadata["R"] = R;
  r.metadata["C_emp_max"] = series_max(c_emp);
  if (bound) {
    r.tolerance = *bound;
    r.verdict = series_max(c_emp) <= *bound ? Verdict::pass : Verdict::fail;
  } else {
    r.verdict = Verdict::informational;
    r.note = "the constant C(n) is not specified; empirical value recorded";
  }
  return r;
}

MonitorReport monitor_growth_bound(const Series& s, double C0, double a) {
  require_frames(s, 1, "monitor_growth_bound");
  if (!(C0 > 0.0) || !(a >= 0.0)) {
    throw PreconditionError("monitor_growth_bound: need C0 > 0 and a >= 0");
  }
  MonitorReport r = start_report("growth_bound", s);
  const GridSpec& spec = s.front().state.spec;
  const int n = spec.n;
  {
    const auto& geo = s.front().geometry;
    for (std::size_t node = 0; node < geo.nodes(); ++node) {
      const double delta = geo.sqrt_det_g[node];
      const double lhs = delta < 2.0 ? 1.0 / (2.0 - delta)
                                     : std::numeric_limits<double>::infinity();
      const double rhs = C0 * std::pow(center_dist2(spec, node) + 1.0, a);
      if (!(lhs <= rhs)) {
        throw PreconditionError("monitor_growth_bound: initial data violates "
                                "(2 - Delta_f)^{-1} <= C0 (|x|^2 + 1)^a at node " +
                                std::to_string(node));
      }
    }
  }
  std::vector<double> ratio;
  for (const auto& fr : s) {
    double worst = 0.0;
    for (std::size_t node = 0; node < fr.geometry.nodes(); ++node) {
      const double delta = fr.geometry.sqrt_det_g[node];
      const double lhs = delta < 2.0 ? 1.0 / (2.0 - delta)
                                     : std::numeric_limits<double>::infinity();
      const double rhs =
          2.0 * C0 * std::pow(center_dist2(spec, node) + 2.0 * n * fr.state.t + 1.0, a);
      worst = std::max(worst, lhs / rhs);
    }
    ratio.push_back(worst);
  }
  r.series.emplace_back("max_ratio", ratio);
  r.metadata["C0"] = C0;
  r.metadata["a"] = a;
  r.metadata["max_ratio"] = series_max(ratio);
  const bool ok = series_max(ratio) <= 1.0;
  if (a == 0.0) {
    r.verdict = ok ? Verdict::pass : Verdict::fail;
  } else {
    r.verdict = Verdict::informational;
    r.note = "growth clause on a periodic cell; |x| is not an entire-graph radius";
    r.metadata["bound_holds"] = ok;
  }
  r.tolerance = 1.0;
  return r;
}

}  // namespace grassflow::monitors
