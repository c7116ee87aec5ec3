/// @file geom_oracle.cpp
/// @brief Finite-difference Christoffels, covariant Hessians and geodesics.

#include "grassflow/geom_oracle.hpp"

#include "grassflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grassflow::oracle {
namespace {

Vector flatten(const Matrix& z) {
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index a = 0; a < z.cols(); ++a) out(i * z.cols() + a) = z(i, a);
  return out;
}

Matrix unflatten(const Vector& v, Eigen::Index n, Eigen::Index m) {
  Matrix z(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < m; ++a) z(i, a) = v(i * m + a);
  return z;
}

Matrix basis_matrix(Eigen::Index n, Eigen::Index m, Eigen::Index k) {
  Matrix e = Matrix::Zero(n, m);
  e(k / m, k % m) = 1.0;
  return e;
}

// -Gamma^c_ab v^a v^b
Vector geodesic_acceleration(const MetricField& mf, const Matrix& z,
                             const Vector& vel) {
  const Christoffels gam = christoffels_fd(mf, GrassmannPoint(z));
  const int dim = gam.dim;
  Vector acc = Vector::Zero(dim);
  for (int c = 0; c < dim; ++c) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) s += gam(c, a, b) * vel(a) * vel(b);
    acc(c) = -s;
  }
  return acc;
}

}  // namespace

MetricField canonical_metric(double step) {
  MetricField mf;
  mf.step = step;
  mf.evaluator = [](const Matrix& z) {
    const Eigen::Index n = z.rows();
    const Eigen::Index m = z.cols();
    const Matrix ai = (Matrix::Identity(n, n) + z * z.transpose()).inverse();
    const Matrix bi = (Matrix::Identity(m, m) + z.transpose() * z).inverse();
    Matrix g(n * m, n * m);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index j = 0; j < n; ++j)
          for (Eigen::Index b = 0; b < m; ++b)
            g(i * m + a, j * m + b) = ai(i, j) * bi(a, b);
    return g;
  };
  return mf;
}

Christoffels christoffels_fd(const MetricField& mf, const GrassmannPoint& p) {
  const Matrix& z = p.z();
  const Eigen::Index n = z.rows();
  const Eigen::Index m = z.cols();
  const int dim = static_cast<int>(n * m);
  const double h = mf.step;

  const Matrix g = mf.evaluator(z);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e10) {
    throw OracleError("ill-conditioned Gram matrix (condition " +
                      std::to_string(hi / lo) + ")");
  }
  const Matrix gi = g.inverse();

  std::vector<Matrix> dg(dim);
  for (int a = 0; a < dim; ++a) {
    const Matrix e = h * basis_matrix(n, m, a);
    dg[a] = (mf.evaluator(z + e) - mf.evaluator(z - e)) / (2.0 * h);
  }

  Christoffels out;
  out.dim = dim;
  out.data.assign(static_cast<std::size_t>(dim) * dim * dim, 0.0);
  // lowered[a][b](d) = d_a g_bd + d_b g_ad - d_d g_ab
  for (int a = 0; a < dim; ++a) {
    for (int b = a; b < dim; ++b) {
      Vector lowered(dim);
      for (int d = 0; d < dim; ++d) {
        lowered(d) = dg[a](b, d) + dg[b](a, d) - dg[d](a, b);
      }
      const Vector raised = 0.5 * gi * lowered;
      for (int c = 0; c < dim; ++c) {
        out.data[(static_cast<std::size_t>(c) * dim + a) * dim + b] = raised(c);
        out.data[(static_cast<std::size_t>(c) * dim + b) * dim + a] = raised(c);
      }
    }
  }
  return out;
}

double covariant_hessian_fd(const MetricField& mf, const ScalarFunction& f,
                            const GrassmannPoint& p, const TangentVector& x) {
  const Matrix& z = p.z();
  const Eigen::Index n = z.rows();
  const Eigen::Index m = z.cols();
  const double h = mf.step;
  const double scale = x.x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const Matrix dir = x.x / scale;

  const double f0 = f(z);
  const double second =
      (f(z + h * dir) - 2.0 * f0 + f(z - h * dir)) / (h * h) * scale * scale;

  const Christoffels gam = christoffels_fd(mf, p);
  const Vector xv = flatten(x.x);
  double correction = 0.0;
  for (int c = 0; c < gam.dim; ++c) {
    const Matrix e = h * basis_matrix(n, m, c);
    const double grad = (f(z + e) - f(z - e)) / (2.0 * h);
    double contraction = 0.0;
    for (int a = 0; a < gam.dim; ++a)
      for (int b = 0; b < gam.dim; ++b) contraction += gam(c, a, b) * xv(a) * xv(b);
    correction += contraction * grad;
  }
  return second - correction;
}

double covariant_hessian_fd(const ScalarFunction& f, const GrassmannPoint& p,
                            const TangentVector& x, double step) {
  return covariant_hessian_fd(canonical_metric(step), f, p, x);
}

GeodesicEnd geodesic_integrate(const GrassmannPoint& p0, const TangentVector& x,
                               double length, double max_step) {
  const MetricField mf = canonical_metric();
  const Eigen::Index n = p0.n();
  const Eigen::Index m = p0.m();
  if (x.x.rows() != n || x.x.cols() != m) {
    throw ValidationError("geodesic_integrate: direction shape mismatch");
  }
  Vector z = flatten(p0.z());
  Vector vel = flatten(x.x);
  const double speed0 = vel.dot(mf.evaluator(p0.z()) * vel);
  if (std::abs(speed0 - 1.0) > 1e-8) {
    throw ValidationError("geodesic_integrate: direction is not unit length (g = " +
                          std::to_string(speed0) + ")");
  }
  if (length < 0.0) throw ValidationError("geodesic_integrate: negative length");

  GeodesicEnd end{p0, x, 0.0};
  if (length == 0.0) return end;

  const long steps = std::max(1L, static_cast<long>(std::ceil(length / max_step)));
  const double dt = length / static_cast<double>(steps);

  auto accel = [&](const Vector& zz, const Vector& vv, double arc) {
    const Matrix zm = unflatten(zz, n, m);
    if (!zm.allFinite() || zm.cwiseAbs().maxCoeff() > 1e6) {
      throw ChartExit("geodesic left the coordinate chart", arc);
    }
    try {
      return geodesic_acceleration(mf, zm, vv);
    } catch (const ChartExit&) {
      throw;
    } catch (const OracleError& e) {
      throw ChartExit(std::string("geodesic left the coordinate chart: ") + e.what(),
                      arc);
    }
  };

  double max_dev = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double arc = static_cast<double>(k) * dt;
    const Vector k1z = vel;
    const Vector k1v = accel(z, vel, arc);
    const Vector k2z = vel + 0.5 * dt * k1v;
    const Vector k2v = accel(z + 0.5 * dt * k1z, k2z, arc);
    const Vector k3z = vel + 0.5 * dt * k2v;
    const Vector k3v = accel(z + 0.5 * dt * k2z, k3z, arc);
    const Vector k4z = vel + dt * k3v;
    const Vector k4v = accel(z + dt * k3z, k4z, arc);
    z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    vel += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

    const Matrix zm = unflatten(z, n, m);
    if (!zm.allFinite() || zm.cwiseAbs().maxCoeff() > 1e6) {
      throw ChartExit("geodesic left the coordinate chart", arc + dt);
    }
    const double speed = std::sqrt(vel.dot(mf.evaluator(zm) * vel));
    max_dev = std::max(max_dev, std::abs(speed - 1.0));
  }
  end.point = GrassmannPoint(unflatten(z, n, m));
  end.velocity = TangentVector{unflatten(vel, n, m)};
  end.max_speed_deviation = max_dev;
  return end;
}

GrassmannPoint geodesic_shoot(const GrassmannPoint& p0, const TangentVector& x,
                              double length, double max_step) {
  return geodesic_integrate(p0, x, length, max_step).point;
}

ShootingResult distance_bruteforce_detailed(const GrassmannPoint& p) {
  const Eigen::Index n = p.n();
  const Eigen::Index m = p.m();
  const Vector target = flatten(p.z());
  ShootingResult result;
  const double znorm = target.norm();
  if (znorm == 0.0) return result;

  const GrassmannPoint origin = GrassmannPoint::origin(static_cast<int>(n),
                                                        static_cast<int>(m));
  // The metric is Euclidean at Z = 0, so |u| is the arc length.
  auto endpoint = [&](const Vector& u, double max_step) {
    const double len = u.norm();
    if (len == 0.0) return Vector(Vector::Zero(u.size()));
    const TangentVector dir{unflatten(u / len, n, m)};
    return flatten(geodesic_shoot(origin, dir, len, max_step).z());
  };

  Vector u = target / znorm * std::atan(znorm);
  Vector residual = endpoint(u, 1e-3) - target;
  const Eigen::Index dim = u.size();
  for (int it = 0; it < 100; ++it) {
    result.iterations = it;
    const double err = residual.cwiseAbs().maxCoeff();
    if (err < 1e-10) break;

    // Jacobian shots use a coarser step; only the residual needs full accuracy.
    Matrix jac(dim, dim);
    const double delta = 1e-6 * std::max(1.0, u.norm());
    for (Eigen::Index k = 0; k < dim; ++k) {
      Vector up = u, um = u;
      up(k) += delta;
      um(k) -= delta;
      jac.col(k) = (endpoint(up, 1e-2) - endpoint(um, 1e-2)) / (2.0 * delta);
    }
    const Vector du = jac.partialPivLu().solve(-residual);
    double lambda = 1.0;
    bool improved = false;
    for (int damp = 0; damp < 30; ++damp) {
      const Vector trial = u + lambda * du;
      try {
        const Vector r = endpoint(trial, 1e-3) - target;
        if (r.cwiseAbs().maxCoeff() < err) {
          u = trial;
          residual = r;
          improved = true;
          break;
        }
      } catch (const ChartExit&) {
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  result.endpoint_error = residual.cwiseAbs().maxCoeff();
  if (!(result.endpoint_error <= 1e-6)) {
    throw OracleError("distance_bruteforce: shooting did not converge (error " +
                      std::to_string(result.endpoint_error) + ")");
  }
  result.distance = u.norm();
  return result;
}

double distance_bruteforce(const GrassmannPoint& p) {
  return distance_bruteforce_detailed(p).distance;
}

}  // namespace grassflow::oracle
