/// @file sampling.cpp
/// @brief Seeded samplers for the randomized scans.

#include "grassflow/sampling.hpp"

#include "grassflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace grassflow::sampling {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double uniform(double lo, double hi, Rng& rng) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vector random_direction_angles(int p, Rng& rng) {
  Vector theta(p);
  for (int a = 0; a < p; ++a) theta(a) = uniform(0.0, 1.0, rng);
  if (theta.maxCoeff() == 0.0) theta(0) = 1.0;
  return theta / theta.maxCoeff();
}

double log_v_of_angles(const Vector& theta) {
  double out = 0.0;
  for (double t : theta) out -= std::log(std::cos(t));
  return out;
}

// Largest s in [0, pi/2) with log v(s * dir) <= target.
Vector scale_to_log_v(const Vector& dir, double target) {
  double lo = 0.0;
  double hi = kHalfPi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_v_of_angles(mid * dir) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo * dir;
}

}  // namespace

Matrix random_orthogonal(int k, Rng& rng) {
  std::normal_distribution<double> gauss;
  Matrix a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

GrassmannPoint point_with_angles(int n, int m, const Vector& theta, Rng& rng) {
  const Matrix u = random_orthogonal(n, rng);
  const Matrix q = random_orthogonal(m, rng);
  Matrix d = Matrix::Zero(n, m);
  for (Eigen::Index a = 0; a < theta.size(); ++a) d(a, a) = std::tan(theta(a));
  return GrassmannPoint(u * d * q.transpose());
}

GrassmannPoint point_with_v_at_most(int n, int m, double v_max, Rng& rng) {
  if (!(v_max > 1.0)) throw ValidationError("point_with_v_at_most: v_max <= 1");
  const int p = std::min(n, m);
  // One sample in twenty sits on the boundary v = v_max itself.
  const bool boundary = uniform_int(0, 19, rng) == 0;
  const double target = boundary ? v_max : uniform(1.0, v_max, rng);
  const Vector theta =
      scale_to_log_v(random_direction_angles(p, rng), std::log(target));
  return point_with_angles(n, m, theta, rng);
}

GrassmannPoint point_with_v_below(int n, int m, double v_max, Rng& rng) {
  if (!(v_max > 1.0)) throw ValidationError("point_with_v_below: v_max <= 1");
  const int p = std::min(n, m);
  const double target = uniform(1.0, v_max, rng);
  const Vector theta =
      scale_to_log_v(random_direction_angles(p, rng), std::log(target));
  return point_with_angles(n, m, theta, rng);
}

GrassmannPoint point_with_rho_at_most(int n, int m, double rho_max, Rng& rng) {
  const int p = std::min(n, m);
  Vector theta(p);
  for (;;) {
    std::normal_distribution<double> gauss;
    for (int a = 0; a < p; ++a) theta(a) = std::abs(gauss(rng));
    if (theta.norm() == 0.0) continue;
    theta *= uniform(0.0, rho_max, rng) / theta.norm();
    if (theta.maxCoeff() < kHalfPi - 1e-3) break;
  }
  return point_with_angles(n, m, theta, rng);
}

GrassmannPoint point_near_convex_boundary(int n, int m, double spread, Rng& rng) {
  const int p = std::min(n, m);
  if (p < 2) throw ValidationError("point_near_convex_boundary: min(n, m) < 2");
  const double sum = kHalfPi + uniform(-spread, spread, rng);
  // theta_1 in (sum - pi/2, pi/2) keeps both angles in the chart.
  const double lo = std::max(0.0, sum - kHalfPi) + 1e-3;
  const double hi = std::min(sum, kHalfPi) - 1e-3;
  Vector theta = Vector::Zero(p);
  theta(0) = uniform(lo, hi, rng);
  theta(1) = sum - theta(0);
  const double smallest = std::min(theta(0), theta(1));
  for (int a = 2; a < p; ++a) theta(a) = uniform(0.0, smallest, rng);
  return point_with_angles(n, m, theta, rng);
}

TangentVector random_tangent(int n, int m, Rng& rng) {
  std::normal_distribution<double> gauss;
  Matrix x(n, m);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) x(i, a) = gauss(rng);
  return {x};
}

FramePair random_frame_pair(int n, int m, Rng& rng) {
  const Matrix a = random_orthogonal(n + m, rng);
  const Matrix b = random_orthogonal(n + m, rng);
  FramePair fp{a.topRows(n), b.topRows(n)};
  if (grassmann::w_of(fp) < 0.0) fp.p_frame.row(0) *= -1.0;
  return fp;
}

int uniform_int(int lo, int hi, Rng& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace grassflow::sampling
