/// @file graph_mcf.cpp
/// @brief Grid, geometry and time stepping for the graphical flow.

#include "grassflow/graph_mcf.hpp"

#include "grassflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace grassflow::mcf {

// --- GridSpec ------------------------------------------------------------------

GridSpec GridSpec::uniform(int n, int m, int cells, double period) {
  GridSpec s;
  s.n = n;
  s.m = m;
  s.cells.assign(n, cells);
  s.period.assign(n, period);
  s.origin.assign(n, 0.0);
  return s;
}

void GridSpec::validate() const {
  if (n < 1 || n > 3) throw ValidationError("grid: n must be in 1..3");
  if (m < 1 || m > 3) throw ValidationError("grid: m must be in 1..3");
  if (static_cast<int>(cells.size()) != n || static_cast<int>(period.size()) != n) {
    throw ValidationError("grid: need one cell count and one period per axis");
  }
  if (!origin.empty() && static_cast<int>(origin.size()) != n) {
    throw ValidationError("grid: origin must have one entry per axis");
  }
  for (int i = 0; i < n; ++i) {
    if (cells[i] < 8 || cells[i] > 512) {
      throw ValidationError("grid: N must be in 8..512 (axis " +
                            std::to_string(i + 1) + ")");
    }
    if (!(period[i] > 0.0) || !std::isfinite(period[i])) {
      throw ValidationError("grid: period must be positive (axis " +
                            std::to_string(i + 1) + ")");
    }
  }
}

double GridSpec::h_min() const {
  double out = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) out = std::min(out, h(i));
  return out;
}

std::size_t GridSpec::node_count() const {
  std::size_t c = 1;
  for (int i = 0; i < n; ++i) c *= static_cast<std::size_t>(cells[i]);
  return c;
}

int GridSpec::stride(int axis) const {
  int s = 1;
  for (int i = 0; i < axis; ++i) s *= cells[i];
  return s;
}

int GridSpec::index_along(std::size_t node, int axis) const {
  return static_cast<int>((node / static_cast<std::size_t>(stride(axis))) %
                          static_cast<std::size_t>(cells[axis]));
}

double GridSpec::coord(std::size_t node, int axis) const {
  const double o = origin.empty() ? 0.0 : origin[axis];
  return o + index_along(node, axis) * h(axis);
}

double GridSpec::center(int axis) const {
  const double o = origin.empty() ? 0.0 : origin[axis];
  return o + 0.5 * (cells[axis] - 1) * h(axis);
}

std::size_t GridSpec::neighbor(std::size_t node, int axis, int offset,
                               int* wraps) const {
  const int nc = cells[axis];
  const int k = index_along(node, axis);
  int shifted = k + offset;
  int w = 0;
  while (shifted >= nc) {
    shifted -= nc;
    ++w;
  }
  while (shifted < 0) {
    shifted += nc;
    --w;
  }
  if (wraps != nullptr) *wraps = w;
  const long delta = static_cast<long>(shifted - k) * stride(axis);
  return static_cast<std::size_t>(static_cast<long>(node) + delta);
}

// --- GraphState ----------------------------------------------------------------

double GraphState::shifted(std::size_t node, int alpha, int axis, int offset) const {
  int w = 0;
  const std::size_t j = spec.neighbor(node, axis, offset, &w);
  double val = f[j * spec.m + alpha];
  if (w != 0 && tilt.size() != 0) val += w * spec.period[axis] * tilt(axis, alpha);
  return val;
}

double GraphState::shifted2(std::size_t node, int alpha, int axis1, int off1,
                            int axis2, int off2) const {
  int w1 = 0;
  int w2 = 0;
  const std::size_t j1 = spec.neighbor(node, axis1, off1, &w1);
  const std::size_t j2 = spec.neighbor(j1, axis2, off2, &w2);
  double val = f[j2 * spec.m + alpha];
  if (tilt.size() != 0) {
    if (w1 != 0) val += w1 * spec.period[axis1] * tilt(axis1, alpha);
    if (w2 != 0) val += w2 * spec.period[axis2] * tilt(axis2, alpha);
  }
  return val;
}

NodeJet jet_at(const GraphState& s, std::size_t node) {
  const int n = s.spec.n;
  const int m = s.spec.m;
  NodeJet jet{Matrix(n, m), Matrix(n * n, m)};
  for (int a = 0; a < m; ++a) {
    const double f0 = s.value(node, a);
    for (int i = 0; i < n; ++i) {
      const double hi = s.spec.h(i);
      const double fp = s.shifted(node, a, i, 1);
      const double fm = s.shifted(node, a, i, -1);
      jet.df(i, a) = (fp - fm) / (2.0 * hi);
      jet.d2f(i * n + i, a) = (fp - 2.0 * f0 + fm) / (hi * hi);
      for (int j = i + 1; j < n; ++j) {
        const double hj = s.spec.h(j);
        const double mixed = (s.shifted2(node, a, i, 1, j, 1) -
                              s.shifted2(node, a, i, 1, j, -1) -
                              s.shifted2(node, a, i, -1, j, 1) +
                              s.shifted2(node, a, i, -1, j, -1)) /
                             (4.0 * hi * hj);
        jet.d2f(i * n + j, a) = mixed;
        jet.d2f(j * n + i, a) = mixed;
      }
    }
  }
  return jet;
}

// --- GeometrySnapshot ----------------------------------------------------------

GeometrySnapshot::GeometrySnapshot(int n, int m, std::size_t nodes)
    : sqrt_det_g(nodes),
      b2(nodes),
      v_tilde(nodes),
      rho(nodes),
      h_v32(nodes),
      h_sec(nodes),
      n_(n),
      m_(m),
      nodes_(nodes),
      g_(nodes * n * n),
      inv_g_(nodes * n * n),
      b_(nodes * (n + m) * n * n),
      h_(nodes * (n + m)),
      z_(nodes * n * m) {}

Eigen::Map<const Matrix> GeometrySnapshot::g(std::size_t k) const {
  return {g_.data() + k * n_ * n_, n_, n_};
}
Eigen::Map<const Matrix> GeometrySnapshot::inv_g(std::size_t k) const {
  return {inv_g_.data() + k * n_ * n_, n_, n_};
}
Eigen::Map<const Matrix> GeometrySnapshot::B(std::size_t k) const {
  return {b_.data() + k * (n_ + m_) * n_ * n_, n_ + m_, n_ * n_};
}
Eigen::Map<const Vector> GeometrySnapshot::H(std::size_t k) const {
  return {h_.data() + k * (n_ + m_), n_ + m_};
}
Eigen::Map<const Matrix> GeometrySnapshot::gauss_z(std::size_t k) const {
  return {z_.data() + k * n_ * m_, n_, m_};
}
Eigen::Map<Matrix> GeometrySnapshot::g(std::size_t k) {
  return {g_.data() + k * n_ * n_, n_, n_};
}
Eigen::Map<Matrix> GeometrySnapshot::inv_g(std::size_t k) {
  return {inv_g_.data() + k * n_ * n_, n_, n_};
}
Eigen::Map<Matrix> GeometrySnapshot::B(std::size_t k) {
  return {b_.data() + k * (n_ + m_) * n_ * n_, n_ + m_, n_ * n_};
}
Eigen::Map<Vector> GeometrySnapshot::H(std::size_t k) {
  return {h_.data() + k * (n_ + m_), n_ + m_};
}
Eigen::Map<Matrix> GeometrySnapshot::gauss_z(std::size_t k) {
  return {z_.data() + k * n_ * m_, n_, m_};
}

GeometrySnapshot geometry_of(const GraphState& s) {
  const int n = s.spec.n;
  const int m = s.spec.m;
  const int d = n + m;
  const std::size_t count = s.spec.node_count();
  GeometrySnapshot geo(n, m, count);

  for (std::size_t k = 0; k < count; ++k) {
    const NodeJet jet = jet_at(s, k);
    if (!jet.df.allFinite() || !jet.d2f.allFinite()) {
      throw FlowError("state blown up at node " + std::to_string(k), std::nullopt,
                      static_cast<long>(k));
    }
    const Matrix& z = jet.df;
    const Matrix g = Matrix::Identity(n, n) + z * z.transpose();
    const Matrix gi = g.inverse();
    geo.g(k) = g;
    geo.inv_g(k) = gi;
    geo.gauss_z(k) = z;

    // Tangent frame columns (e_i, d_i f); normal projector I - T g^{-1} T^T.
    Matrix tangent(d, n);
    tangent.topRows(n).setIdentity();
    tangent.bottomRows(m) = z.transpose();
    const Matrix proj =
        Matrix::Identity(d, d) - tangent * gi * tangent.transpose();

    auto bk = geo.B(k);
    Vector second = Vector::Zero(d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        second.tail(m) = jet.d2f.row(i * n + j).transpose();
        bk.col(i * n + j) = proj * second;
      }
    }
    Vector mean = Vector::Zero(d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) mean += gi(i, j) * bk.col(i * n + j);
    geo.H(k) = mean;

    double b2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q)
            b2 += gi(i, p) * gi(j, q) * bk.col(i * n + j).dot(bk.col(p * n + q));
    geo.b2[k] = b2;

    const grassmann::GrassmannPoint gp(z);
    const double sdg = std::sqrt(g.determinant());
    geo.sqrt_det_g[k] = sdg;
    geo.v_tilde[k] = grassmann::v_of(gp);
    geo.rho[k] = grassmann::rho_of(gp);
    geo.h_v32[k] = sdg < 2.0 ? std::pow(sdg / (2.0 - sdg), 1.5)
                             : std::numeric_limits<double>::quiet_NaN();
    if (geo.rho[k] < grassmann::kCriticalRadius) {
      const double c = std::cos(std::sqrt(2.0) * geo.rho[k]);
      geo.h_sec[k] = 1.0 / (c * c);
    } else {
      geo.h_sec[k] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return geo;
}

// --- flow ----------------------------------------------------------------------

std::vector<double> mcf_velocity(const GraphState& s) {
  const int n = s.spec.n;
  const int m = s.spec.m;
  const std::size_t count = s.spec.node_count();
  std::vector<double> out(count * m);
  for (std::size_t k = 0; k < count; ++k) {
    const NodeJet jet = jet_at(s, k);
    const Matrix gi =
        (Matrix::Identity(n, n) + jet.df * jet.df.transpose()).inverse();
    for (int a = 0; a < m; ++a) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += gi(i, j) * jet.d2f(i * n + j, a);
      out[k * m + a] = acc;
    }
  }
  return out;
}

double cfl_dt(const GraphState& s, double safety) {
  const int n = s.spec.n;
  const double hmin = s.spec.h_min();
  const std::size_t count = s.spec.node_count();
  double worst = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const NodeJet jet = jet_at(s, k);
    const Matrix gi =
        (Matrix::Identity(n, n) + jet.df * jet.df.transpose()).inverse();
    worst = std::max(worst, gi.trace());
  }
  return safety * hmin * hmin / (2.0 * worst);
}

namespace {

void apply_clamp(GraphState& s) {
  if (!s.clamp) return;
  const int n = s.spec.n;
  const int m = s.spec.m;
  const int last = s.spec.cells[0] - 1;
  Vector x(n);
  for (std::size_t k = 0; k < s.spec.node_count(); ++k) {
    const int i0 = s.spec.index_along(k, 0);
    if (i0 != 0 && i0 != last) continue;
    for (int i = 0; i < n; ++i) x(i) = s.spec.coord(k, i);
    const Vector val = s.clamp->value(x, s.t);
    for (int a = 0; a < m; ++a) s.f[k * m + a] = val(a);
  }
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

GraphState step(const GraphState& s, double dt, double cfl_safety) {
  if (!(dt > 0.0)) throw ValidationError("step: dt must be positive");
  const double limit = cfl_dt(s, cfl_safety);
  if (dt > limit * (1.0 + 1e-12)) {
    throw CflViolation("step: dt = " + std::to_string(dt) +
                           " exceeds the CFL limit " + std::to_string(limit),
                       s);
  }
  const std::vector<double> k1 = mcf_velocity(s);
  GraphState stage = s;
  for (std::size_t q = 0; q < stage.f.size(); ++q) stage.f[q] += dt * k1[q];
  stage.t = s.t + dt;
  apply_clamp(stage);
  if (!all_finite(stage.f)) throw FlowError("step: state blown up", s);

  const std::vector<double> k2 = mcf_velocity(stage);
  GraphState out = s;
  for (std::size_t q = 0; q < out.f.size(); ++q) {
    out.f[q] = 0.5 * (s.f[q] + stage.f[q] + dt * k2[q]);
  }
  out.t = s.t + dt;
  apply_clamp(out);
  if (!all_finite(out.f)) throw FlowError("step: state blown up", s);
  return out;
}

// --- Laplace-Beltrami ------------------------------------------------------------

namespace {

// a^{ij} = sqrt(det g) g^{ij} at every node, row-major n x n per node.
std::vector<double> divergence_coefficients(const GraphState& s,
                                            std::vector<double>* sqrt_det) {
  const int n = s.spec.n;
  const std::size_t count = s.spec.node_count();
  std::vector<double> a(count * n * n);
  sqrt_det->resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const NodeJet jet = jet_at(s, k);
    const Matrix g = Matrix::Identity(n, n) + jet.df * jet.df.transpose();
    const double sd = std::sqrt(g.determinant());
    const Matrix gi = g.inverse();
    (*sqrt_det)[k] = sd;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a[(k * n + i) * n + j] = sd * gi(i, j);
  }
  return a;
}

double central(const GridSpec& spec, const std::vector<double>& u,
               std::size_t node, int axis) {
  const std::size_t p = spec.neighbor(node, axis, 1, nullptr);
  const std::size_t q = spec.neighbor(node, axis, -1, nullptr);
  return (u[p] - u[q]) / (2.0 * spec.h(axis));
}

}  // namespace

std::vector<double> laplace_beltrami(const GraphState& s,
                                     const std::vector<double>& u) {
  const GridSpec& spec = s.spec;
  const int n = spec.n;
  const std::size_t count = spec.node_count();
  if (u.size() != count) throw ValidationError("laplace_beltrami: field size mismatch");
  std::vector<double> sd;
  const std::vector<double> a = divergence_coefficients(s, &sd);
  auto coef = [&](std::size_t k, int i, int j) { return a[(k * n + i) * n + j]; };

  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double hi = spec.h(i);
      const std::size_t kp = spec.neighbor(k, i, 1, nullptr);
      const std::size_t km = spec.neighbor(k, i, -1, nullptr);
      const double ap = 0.5 * (coef(k, i, i) + coef(kp, i, i));
      const double am = 0.5 * (coef(k, i, i) + coef(km, i, i));
      acc += (ap * (u[kp] - u[k]) - am * (u[k] - u[km])) / (hi * hi);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        acc += (coef(kp, i, j) * central(spec, u, kp, j) -
                coef(km, i, j) * central(spec, u, km, j)) /
               (2.0 * hi);
      }
    }
    out[k] = acc / sd[k];
  }
  return out;
}

double dirichlet_form(const GraphState& s, const std::vector<double>& u,
                      const std::vector<double>& w) {
  const GridSpec& spec = s.spec;
  const int n = spec.n;
  const std::size_t count = spec.node_count();
  std::vector<double> sd;
  const std::vector<double> a = divergence_coefficients(s, &sd);
  auto coef = [&](std::size_t k, int i, int j) { return a[(k * n + i) * n + j]; };
  double cell = 1.0;
  for (int i = 0; i < n; ++i) cell *= spec.h(i);

  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    for (int i = 0; i < n; ++i) {
      const double hi = spec.h(i);
      const std::size_t kp = spec.neighbor(k, i, 1, nullptr);
      const double face = 0.5 * (coef(k, i, i) + coef(kp, i, i));
      total += face * (u[kp] - u[k]) * (w[kp] - w[k]) / (hi * hi);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        total += coef(k, i, j) * central(spec, u, k, j) * central(spec, w, k, i);
      }
    }
  }
  return total * cell;
}

Vector field_gradient(const GraphState& s, const std::vector<double>& u,
                      std::size_t node) {
  Vector grad(s.spec.n);
  for (int i = 0; i < s.spec.n; ++i) grad(i) = central(s.spec, u, node, i);
  return grad;
}

// --- run -------------------------------------------------------------------------

RunResult run(const GraphState& s0, double t_end, double snapshot_every,
              double cfl_safety) {
  if (!(t_end >= s0.t)) throw ValidationError("run: t_end precedes the initial time");
  RunResult result;
  GraphState s = s0;
  try {
    result.frames.push_back({s, geometry_of(s)});
  } catch (const FlowError& e) {
    result.error = e.what();
    return result;
  }
  if (t_end == s0.t) return result;

  std::vector<double> targets;
  if (snapshot_every > 0.0) {
    for (long k = 1;; ++k) {
      const double tk = s0.t + static_cast<double>(k) * snapshot_every;
      if (tk >= t_end - 1e-12 * std::max(1.0, std::abs(t_end))) break;
      targets.push_back(tk);
    }
  }
  targets.push_back(t_end);

  try {
    for (const double target : targets) {
      while (s.t < target) {
        const double limit = cfl_dt(s, cfl_safety);
        const double remaining = target - s.t;
        const bool last = limit >= remaining;
        const double dt = last ? remaining : limit;
        s = step(s, dt, cfl_safety);
        if (last) s.t = target;
        ++result.steps;
        result.max_dt = std::max(result.max_dt, dt);
        if (!(limit > 1e-14)) throw CflViolation("run: CFL time step collapsed", s);
      }
      result.frames.push_back({s, geometry_of(s)});
    }
  } catch (const FlowError& e) {
    result.error = e.what();
  }
  return result;
}

}  // namespace grassflow::mcf
