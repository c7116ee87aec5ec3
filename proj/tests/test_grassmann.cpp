// Closed-form Grassmannian kernel against hand values and independent
// finite-difference / linear-algebra oracles.

#include "doctest.h"

#include "grassflow/errors.hpp"
#include "grassflow/geom_oracle.hpp"
#include "grassflow/grassmann.hpp"
#include "grassflow/sampling.hpp"

#include <cmath>
#include <numbers>

using namespace grassflow;
using namespace grassflow::grassmann;
namespace smp = grassflow::sampling;

namespace {

Matrix unit_matrix(int n, int m, int i, int a) {
  Matrix e = Matrix::Zero(n, m);
  e(i, a) = 1.0;
  return e;
}

constexpr double kPi = std::numbers::pi;

// Independent v: the defining determinant, no Cholesky, no SVD.
double v_by_det(const Matrix& z) {
  const Eigen::Index n = z.rows();
  return std::sqrt((Matrix::Identity(n, n) + z * z.transpose()).determinant());
}

Matrix diag2(double a, double b) {
  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = a;
  z(1, 1) = b;
  return z;
}

Matrix one(double x) { return Matrix::Constant(1, 1, x); }

}  // namespace

TEST_CASE("w of identical frames is one, of a rotated line cos t") {
  smp::Rng rng(1);
  const Matrix f = smp::random_orthogonal(4, rng).topRows(2);
  CHECK(w_of({f, f}) == doctest::Approx(1.0).epsilon(1e-14));

  const double t = 0.7;
  Matrix p(1, 2), p0(1, 2);
  p << std::cos(t), std::sin(t);
  p0 << 1.0, 0.0;
  CHECK(w_of({p, p0}) == doctest::Approx(std::cos(t)).epsilon(1e-14));
}

TEST_CASE("w times v is one on the chart") {
  smp::Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const FramePair fp = smp::random_frame_pair(n, m, rng);
    const double w = w_of(fp);
    if (w < 1e-3) continue;
    CHECK(std::abs(w * v_of(coords_of(fp)) - 1.0) <= 1e-10);
  }
}

TEST_CASE("non-orthonormal frames are rejected") {
  Matrix p(1, 2), p0(1, 2);
  p << 1.0, 0.1;
  p0 << 1.0, 0.0;
  CHECK_THROWS_AS(w_of({p, p0}), ValidationError);
  CHECK_THROWS_AS(coords_of({p, p0}), ValidationError);
  const Matrix fixed = orthonormalize_rows(p);
  CHECK_NOTHROW(require_orthonormal_rows(fixed));
}

TEST_CASE("coords of a rotated line is tan t; identical frames give zero") {
  const double t = 0.9;
  Matrix p(1, 2), p0(1, 2);
  p << std::cos(t), std::sin(t);
  p0 << 1.0, 0.0;
  CHECK(coords_of({p, p0}).z()(0, 0) == doctest::Approx(std::tan(t)).epsilon(1e-13));
  CHECK(coords_of({p0, p0}).z().norm() == 0.0);
}

TEST_CASE("coords outside the chart raise a domain error") {
  Matrix p(1, 2), p0(1, 2);
  p << -0.6, 0.8;
  p0 << 1.0, 0.0;
  CHECK_THROWS_AS(coords_of({p, p0}), DomainError);
}

TEST_CASE("coords round trip through a re-orthonormalized frame") {
  smp::Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint p = smp::point_with_v_below(n, m, 3.0, rng);
    // Mix the rows inside the plane before orthonormalizing.
    const Matrix mix = smp::random_orthogonal(n, rng);
    Matrix rows(n, n + m);
    rows << Matrix::Identity(n, n), p.z();
    Matrix frame = orthonormalize_rows(mix * rows);
    Matrix p0 = Matrix::Zero(n, n + m);
    p0.leftCols(n) = Matrix::Identity(n, n);
    if (w_of({frame, p0}) < 0.0) frame.row(0) *= -1.0;
    const GrassmannPoint back = coords_of({frame, p0});
    CHECK((back.z() - p.z()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("v at hand-computed points") {
  CHECK(v_of(GrassmannPoint::origin(2, 3)) == 1.0);
  CHECK(v_of(GrassmannPoint(diag2(1.0, 0.0))) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("v equals the product of secants of the Jordan angles") {
  smp::Rng rng(4);
  for (int k = 0; k < 500; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    Matrix z(n, m);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a) z(i, a) = gauss(rng);
    const GrassmannPoint p(z);
    double prod = 1.0;
    for (double t : p.jordan().theta) prod /= std::cos(t);
    const double v = v_of(p);
    CHECK(std::abs(v - prod) <= 1e-10 * v);
    CHECK(std::abs(v - v_by_det(z)) <= 1e-10 * v);
    CHECK(v >= 1.0);
  }
}

TEST_CASE("Jordan angles: hand values and the overlap eigenvalue oracle") {
  CHECK(jordan_of(GrassmannPoint::origin(2, 2)).theta.norm() == 0.0);
  const JordanSpectrum js = jordan_of(GrassmannPoint(diag2(1.0, 1.0)));
  CHECK(js.theta(0) == doctest::Approx(kPi / 4).epsilon(1e-14));
  CHECK(js.theta(1) == doctest::Approx(kPi / 4).epsilon(1e-14));

  smp::Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    std::normal_distribution<double> gauss;
    Matrix z(3, 2);
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < 2; ++a) z(i, a) = gauss(rng);
    const GrassmannPoint p(z);
    const Matrix frame = frame_of(p);
    const Matrix w = frame.leftCols(3);  // W_ij = <e_i, eps_j>
    Eigen::SelfAdjointEigenSolver<Matrix> es(w.transpose() * w);
    // ascending eigenvalues: the smallest cos^2 belongs to the largest angle
    const Vector ev = es.eigenvalues();
    const JordanSpectrum sp = p.jordan();
    CHECK(sp.theta(0) >= sp.theta(1));
    CHECK(std::acos(std::sqrt(ev(0))) == doctest::Approx(sp.theta(0)).epsilon(1e-8));
    CHECK(std::acos(std::sqrt(ev(1))) == doctest::Approx(sp.theta(1)).epsilon(1e-8));
    // the third eigenvalue (n > m) is 1: an untilted direction
    CHECK(ev(2) == doctest::Approx(1.0).epsilon(1e-12));
    // reconstruction
    Matrix d = Matrix::Zero(3, 2);
    for (int a = 0; a < 2; ++a) d(a, a) = std::tan(sp.theta(a));
    CHECK((sp.u * d * sp.q.transpose() - z).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("metric: Euclidean at the origin, zero on zero, 1-d closed form") {
  const TangentVector e11{unit_matrix(2, 2, 0, 0)};
  CHECK(metric_at(GrassmannPoint::origin(2, 2), e11, e11) == 1.0);
  smp::Rng rng(6);
  const GrassmannPoint p = smp::point_with_v_below(2, 3, 2.5, rng);
  CHECK(metric_at(p, {Matrix::Zero(2, 3)}, smp::random_tangent(2, 3, rng)) == 0.0);
  const double lam = 0.8;
  const double expect = 1.0 / ((1 + lam * lam) * (1 + lam * lam));
  CHECK(metric_at(GrassmannPoint(one(lam)), {one(1.0)}, {one(1.0)}) ==
        doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("metric matrix agrees with the independent oracle metric") {
  smp::Rng rng(7);
  const auto mf = oracle::canonical_metric();
  for (int k = 0; k < 50; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint p = smp::point_with_v_below(n, m, 3.0, rng);
    CHECK((metric_matrix(p) - mf.evaluator(p.z())).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("dv: zero at the origin, 1-d closed form, finite differences") {
  smp::Rng rng(8);
  CHECK(dv_at(GrassmannPoint::origin(2, 2), smp::random_tangent(2, 2, rng)) == 0.0);
  const double lam = 1.3;
  CHECK(dv_at(GrassmannPoint(one(lam)), {one(1.0)}) ==
        doctest::Approx(lam / std::sqrt(1 + lam * lam)).epsilon(1e-14));
  for (int k = 0; k < 100; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint p = smp::point_with_v_below(n, m, 3.0, rng);
    const TangentVector x = smp::random_tangent(n, m, rng);
    const double h = 1e-5;
    const double fd = (v_by_det(p.z() + h * x.x) - v_by_det(p.z() - h * x.x)) / (2 * h);
    CHECK(std::abs(dv_at(p, x) - fd) <= 1e-8 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("Hess(v) equals the metric at the origin and vanishes on zero") {
  smp::Rng rng(9);
  for (int k = 0; k < 20; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint o = GrassmannPoint::origin(n, m);
    const TangentVector x = smp::random_tangent(n, m, rng);
    CHECK(hess_v(o, x) == doctest::Approx(metric_at(o, x, x)).epsilon(1e-14));
    const GrassmannPoint p = smp::point_with_v_below(n, m, 3.0, rng);
    CHECK(hess_v(p, {Matrix::Zero(n, m)}) == 0.0);
  }
}

TEST_CASE("Hess(v) matches the finite-difference covariant Hessian") {
  smp::Rng rng(10);
  const oracle::ScalarFunction f = v_by_det;
  for (int k = 0; k < 100; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint p = smp::point_with_v_at_most(n, m, 3.0, rng);
    const TangentVector x = smp::random_tangent(n, m, rng);
    const double closed = hess_v(p, x);
    const double fd = oracle::covariant_hessian_fd(f, p, x);
    CHECK(std::abs(closed - fd) <= 1e-5 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("Hess(v) is independent of the singular-vector gauge") {
  smp::Rng rng(11);
  // Repeated angles: (u, q) are determined only up to a common rotation.
  for (int k = 0; k < 30; ++k) {
    Vector theta(3);
    theta << 0.6, 0.6, 0.2;
    const GrassmannPoint p = smp::point_with_angles(3, 3, theta, rng);
    const TangentVector x = smp::random_tangent(3, 3, rng);
    JordanSpectrum js = p.jordan();
    const Matrix r = smp::random_orthogonal(2, rng);
    Matrix big = Matrix::Identity(3, 3);
    big.topLeftCorner(2, 2) = r;
    // Rotate u and q by the same block inside the repeated eigenspace.
    js.u = js.u * big;
    js.q = js.q * big;
    Matrix d = Matrix::Zero(3, 3);
    for (int a = 0; a < 3; ++a) d(a, a) = std::tan(js.theta(a));
    REQUIRE((js.u * d * js.q.transpose() - p.z()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(hess_v(p, js, x) == doctest::Approx(hess_v(p, x)).epsilon(1e-12));
  }
}

TEST_CASE("Hess(v) bilinear extension is symmetric and matches the matrix") {
  smp::Rng rng(12);
  for (int k = 0; k < 30; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint p = smp::point_with_v_below(n, m, 3.0, rng);
    const TangentVector x = smp::random_tangent(n, m, rng);
    const TangentVector y = smp::random_tangent(n, m, rng);
    const double xy = hess_v_bilinear(p, x, y);
    CHECK(xy == doctest::Approx(hess_v_bilinear(p, y, x)).epsilon(1e-12));
    const Matrix h = hess_v_matrix(p);
    Vector xf(n * m), yf(n * m);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a) {
        xf(i * m + a) = x.x(i, a);
        yf(i * m + a) = y.x(i, a);
      }
    CHECK(xf.dot(h * yf) == doctest::Approx(xy).epsilon(1e-10));
  }
}

TEST_CASE("convexity gap: zero at the origin and on the 1-d family") {
  smp::Rng rng(13);
  const GrassmannPoint o = GrassmannPoint::origin(2, 3);
  CHECK(std::abs(v_convexity_gap(o, smp::random_tangent(2, 3, rng))) <= 1e-14);
  // Hand calculation for n = m = 1: with v = sec(theta), tan^2 = v^2 - 1 and
  // d theta(x) = x / (1 + lam^2), both sides equal (2 v^3 - v) d theta^2.
  for (double lam : {0.1, 0.5, 1.0, 1.5, std::sqrt(3.0)}) {
    const GrassmannPoint p(one(lam));
    CHECK(std::abs(v_convexity_gap(p, {one(1.0)})) <= 1e-12);
  }
}

TEST_CASE("convexity coefficient is continuous through v = 1") {
  for (int p = 1; p <= 3; ++p) {
    const double at_one = v_convexity_coefficient(1.0, p);
    CHECK(at_one == doctest::Approx(0.5 + (p + 1.0) / p).epsilon(1e-14));
    for (double dv : {1e-7, 1e-6, 2e-6, 1e-5, 1e-4}) {
      CHECK(v_convexity_coefficient(1.0 + dv, p) ==
            doctest::Approx(at_one).epsilon(5e-4 * dv / 1e-4 + 1e-9));
    }
  }
}

TEST_CASE("convexity gap refuses points with v > 2") {
  const GrassmannPoint p(diag2(2.0, 0.0));  // v = sqrt 5
  CHECK_THROWS_AS(v_convexity_gap(p, {Matrix::Identity(2, 2)}), DomainError);
}

TEST_CASE("convexity gap is nonnegative on the closed sub-level set") {
  smp::Rng rng(14);
  for (int k = 0; k < 2000; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint p = smp::point_with_v_at_most(n, m, 2.0, rng);
    const TangentVector x = smp::random_tangent(n, m, rng);
    CHECK(v_convexity_gap(p, x) >= -1e-8 * metric_at(p, x, x));
  }
}

TEST_CASE("v32 barrier: value, blow-up on a ray, Hessian bound") {
  CHECK(barrier_v32(GrassmannPoint::origin(2, 2)) == 1.0);
  double prev = 0.0;
  for (double s : {0.5, 1.0, 1.5, 1.7, 1.73, 1.732}) {  // v = sqrt(1+s^2) -> 2
    const double h = barrier_v32(GrassmannPoint(one(s)));
    CHECK(h > prev);
    prev = h;
  }
  CHECK(prev > 1e3);
  CHECK_THROWS_AS(barrier_v32(GrassmannPoint(one(std::sqrt(3.0) + 1e-9))), DomainError);

  smp::Rng rng(15);
  for (int k = 0; k < 2000; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint p = smp::point_with_v_below(n, m, 2.0, rng);
    const TangentVector x = smp::random_tangent(n, m, rng);
    CHECK(hess_bound_v32(p, x) >= -1e-8 * metric_at(p, x, x));
  }
}

TEST_CASE("v32 barrier derivatives match finite differences of the closed form") {
  smp::Rng rng(16);
  const oracle::ScalarFunction h = [](const Matrix& z) {
    const double v = v_by_det(z);
    return std::pow(v / (2.0 - v), 1.5);
  };
  for (int k = 0; k < 40; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint p = smp::point_with_v_below(n, m, 1.8, rng);
    const TangentVector x = smp::random_tangent(n, m, rng);
    const double closed = hess_barrier_v32(p, x);
    const double fd = oracle::covariant_hessian_fd(h, p, x);
    CHECK(std::abs(closed - fd) <= 1e-5 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("sec barrier: hand values and domain") {
  CHECK(barrier_sec(GrassmannPoint::origin(2, 2)) == 1.0);
  const double half = kPi / (4.0 * std::sqrt(2.0));
  CHECK(barrier_sec(GrassmannPoint(one(std::tan(half)))) ==
        doctest::Approx(2.0).epsilon(1e-13));
  CHECK_THROWS_AS(barrier_sec(GrassmannPoint(one(std::tan(kCriticalRadius + 1e-6)))),
                  DomainError);
  CHECK(kCriticalRadius == doctest::Approx(std::sqrt(2.0) * kPi / 4.0).epsilon(1e-16));
}

TEST_CASE("sec barrier Hessian: oracle agreement and lower bound inside the ball") {
  smp::Rng rng(17);
  const oracle::ScalarFunction h = [](const Matrix& z) {
    const GrassmannPoint q(z);
    const double c = std::cos(std::sqrt(2.0) * rho_of(q));
    return 1.0 / (c * c);
  };
  for (int k = 0; k < 40; ++k) {
    const int n = smp::uniform_int(1, 2, rng);
    const int m = smp::uniform_int(1, 2, rng);
    const GrassmannPoint p = smp::point_with_rho_at_most(n, m, 0.9, rng);
    if (rho_of(p) < 1e-2) continue;  // FD of sqrt(sum theta^2) is rough at 0
    const TangentVector x = smp::random_tangent(n, m, rng);
    const double closed = hess_barrier_sec(p, x);
    const double fd = oracle::covariant_hessian_fd(h, p, x);
    CHECK(std::abs(closed - fd) <= 1e-4 * std::max(1.0, std::abs(closed)));
  }
  for (int k = 0; k < 2000; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint p =
        smp::point_with_rho_at_most(n, m, kCriticalRadius * 0.999, rng);
    if (!(rho_of(p) < kCriticalRadius)) continue;
    const TangentVector x = smp::random_tangent(n, m, rng);
    CHECK(hess_bound_sec(p, x) >= -1e-8 * metric_at(p, x, x) * barrier_sec(p));
  }
}

TEST_CASE("Hess(rho^2/2) closed form matches the oracle") {
  smp::Rng rng(18);
  const oracle::ScalarFunction s = [](const Matrix& z) {
    const double r = rho_of(GrassmannPoint(z));
    return 0.5 * r * r;
  };
  for (int k = 0; k < 40; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const GrassmannPoint p = smp::point_with_rho_at_most(n, m, 1.2, rng);
    if (p.p() >= 2 && (p.jordan().theta(0) - p.jordan().theta(1) < 1e-2)) continue;
    if (p.jordan().theta(p.p() - 1) < 1e-2) continue;
    const TangentVector x = smp::random_tangent(n, m, rng);
    const double closed = hess_half_rho_sq(p, x);
    const double fd = oracle::covariant_hessian_fd(s, p, x);
    CHECK(std::abs(closed - fd) <= 1e-5 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("Hessian comparison for rho against sqrt2 cot(sqrt2 rho)") {
  smp::Rng rng(19);
  const oracle::ScalarFunction rho = [](const Matrix& z) {
    return rho_of(GrassmannPoint(z));
  };
  int checked = 0;
  for (int k = 0; k < 200 && checked < 40; ++k) {
    const int n = smp::uniform_int(1, 2, rng);
    const int m = smp::uniform_int(1, 2, rng);
    const GrassmannPoint p = smp::point_with_rho_at_most(n, m, 1.0, rng);
    const double r = rho_of(p);
    if (r < 0.05) continue;
    if (p.p() >= 2 && (p.jordan().theta(0) - p.jordan().theta(1) < 1e-2 ||
                       p.jordan().theta(1) < 1e-2))
      continue;
    // Project a random direction onto ker d rho (metric orthogonal complement
    // of grad rho).
    const int dim = n * m;
    const Matrix g = metric_matrix(p);
    Vector grad(dim);
    for (int a = 0; a < dim; ++a) {
      const Matrix e = unit_matrix(n, m, a / m, a % m);
      grad(a) = d_half_rho_sq(p, {e}) / r;
    }
    const Vector grad_up = g.ldlt().solve(grad);
    const TangentVector raw = smp::random_tangent(n, m, rng);
    Vector xf(dim);
    for (int a = 0; a < dim; ++a) xf(a) = raw.x(a / m, a % m);
    xf -= grad.dot(xf) / grad.dot(grad_up) * grad_up;
    Matrix xm(n, m);
    for (int a = 0; a < dim; ++a) xm(a / m, a % m) = xf(a);
    const TangentVector x{xm};
    const double gxx = metric_at(p, x, x);
    if (gxx < 1e-6) continue;
    const double hess = oracle::covariant_hessian_fd(rho, p, x);
    const double s2r = std::sqrt(2.0) * r;
    CHECK(hess >= std::sqrt(2.0) / std::tan(s2r) * gxx - 1e-6);
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("convex region: hand cases and the sub-level inclusion") {
  CHECK(in_bjx(GrassmannPoint::origin(2, 2)));
  CHECK_FALSE(in_bjx(GrassmannPoint(diag2(std::tan(kPi / 3), std::tan(kPi / 3)))));
  CHECK(in_bjx(GrassmannPoint(one(100.0))));
  smp::Rng rng(20);
  for (int k = 0; k < 2000; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    CHECK(in_bjx(smp::point_with_v_below(n, m, 2.0, rng)));
  }
}

TEST_CASE("Hess(v) is positive definite exactly on the convex region") {
  smp::Rng rng(21);
  for (int k = 0; k < 300; ++k) {
    const int n = smp::uniform_int(2, 3, rng);
    const int m = smp::uniform_int(2, 3, rng);
    const GrassmannPoint p = smp::point_near_convex_boundary(n, m, 0.4, rng);
    if (std::abs(bjx_margin(p)) < 1e-6) continue;
    const auto [lam, dir] = hess_v_min_eigen(p);
    CHECK((lam > 0.0) == in_bjx(p));
    if (!in_bjx(p)) CHECK(hess_v(p, dir) <= 0.0);
  }
}

TEST_CASE("S2 x S2 split: poles, a hand case, frame invariance") {
  Matrix e12 = Matrix::Zero(2, 4);
  e12(0, 0) = 1.0;
  e12(1, 1) = 1.0;
  const auto [a, b] = s2xs2_split(e12);
  CHECK((a - Eigen::Vector3d(1, 0, 0)).norm() <= 1e-15);
  CHECK((b - Eigen::Vector3d(1, 0, 0)).norm() <= 1e-15);

  // e1 ^ e3 has the single Pluecker coordinate w13 = 1.
  Matrix e13 = Matrix::Zero(2, 4);
  e13(0, 0) = 1.0;
  e13(1, 2) = 1.0;
  const auto [c, d] = s2xs2_split(e13);
  CHECK((c - Eigen::Vector3d(0, 1, 0)).norm() <= 1e-15);
  CHECK((d - Eigen::Vector3d(0, 1, 0)).norm() <= 1e-15);

  smp::Rng rng(22);
  for (int k = 0; k < 50; ++k) {
    const Matrix f = smp::random_orthogonal(4, rng).topRows(2);
    Matrix r = smp::random_orthogonal(2, rng);
    if (r.determinant() < 0.0) r.row(0) *= -1.0;
    const auto [g1, g2] = s2xs2_split(f);
    const auto [h1, h2] = s2xs2_split(r * f);
    CHECK(std::abs(g1.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(g2.norm() - 1.0) <= 1e-12);
    CHECK((g1 - h1).norm() <= 1e-12);
    CHECK((g2 - h2).norm() <= 1e-12);
  }
  Matrix bad = e12;
  bad(1, 0) = 0.3;
  CHECK_THROWS_AS(s2xs2_split(bad), ValidationError);
}

TEST_CASE("rho: zero at origin, equals a single angle, matches shooting") {
  CHECK(rho_of(GrassmannPoint::origin(2, 2)) == 0.0);
  const GrassmannPoint p(diag2(std::tan(0.7), 0.0));
  CHECK(rho_of(p) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(oracle::distance_bruteforce(p) == doctest::Approx(0.7).epsilon(1e-4));
}
