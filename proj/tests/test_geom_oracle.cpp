// Finite-difference oracle: self-consistency checks that do not depend on
// any closed form in the kernel.

#include "doctest.h"

#include "grassflow/errors.hpp"
#include "grassflow/geom_oracle.hpp"
#include "grassflow/grassmann.hpp"
#include "grassflow/sampling.hpp"

#include <cmath>

using namespace grassflow;
using namespace grassflow::oracle;
namespace smp = grassflow::sampling;

namespace {

Matrix unit_matrix(int n, int m, int i, int a) {
  Matrix e = Matrix::Zero(n, m);
  e(i, a) = 1.0;
  return e;
}

Matrix one(double x) { return Matrix::Constant(1, 1, x); }

double v_by_det(const Matrix& z) {
  const Eigen::Index n = z.rows();
  return std::sqrt((Matrix::Identity(n, n) + z * z.transpose()).determinant());
}

TangentVector unit_direction(const GrassmannPoint& p, const TangentVector& x) {
  return {x.x / std::sqrt(grassmann::metric_at(p, x, x))};
}

}  // namespace

TEST_CASE("Gram matrix is the identity at the origin") {
  const MetricField mf = canonical_metric();
  const Matrix g = mf.evaluator(Matrix::Zero(2, 3));
  CHECK((g - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Christoffels vanish at the origin and are symmetric") {
  const MetricField mf = canonical_metric();
  const Christoffels g0 = christoffels_fd(mf, GrassmannPoint::origin(2, 2));
  for (double x : g0.data) CHECK(std::abs(x) <= 1e-12);

  smp::Rng rng(31);
  const GrassmannPoint p = smp::point_with_v_below(2, 3, 2.5, rng);
  const Christoffels gam = christoffels_fd(mf, p);
  for (int c = 0; c < gam.dim; ++c)
    for (int a = 0; a < gam.dim; ++a)
      for (int b = 0; b < gam.dim; ++b) CHECK(gam(c, a, b) == gam(c, b, a));
}

TEST_CASE("Christoffels are metric compatible") {
  const MetricField mf = canonical_metric();
  smp::Rng rng(32);
  const GrassmannPoint p = smp::point_with_v_below(2, 2, 2.5, rng);
  const Christoffels gam = christoffels_fd(mf, p);
  const Matrix g = mf.evaluator(p.z());
  const int dim = gam.dim;
  const double h = 1e-4;
  for (int a = 0; a < dim; ++a) {
    const Matrix e = unit_matrix(2, 2, a / 2, a % 2) * h;
    const Matrix dg = (mf.evaluator(p.z() + e) - mf.evaluator(p.z() - e)) / (2 * h);
    for (int b = 0; b < dim; ++b)
      for (int c = 0; c < dim; ++c) {
        double r = dg(b, c);
        for (int d = 0; d < dim; ++d) {
          r -= gam(d, a, b) * g(d, c) + gam(d, a, c) * g(b, d);
        }
        CHECK(std::abs(r) <= 1e-6);
      }
  }
}

TEST_CASE("ill-conditioned Gram matrix is reported") {
  const MetricField mf = canonical_metric();
  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = 1e6;  // one angle next to pi/2, one at zero
  CHECK_THROWS_AS(christoffels_fd(mf, GrassmannPoint(z)), OracleError);
}

TEST_CASE("covariant Hessian: constant is zero, v at origin is the metric") {
  smp::Rng rng(33);
  const GrassmannPoint p = smp::point_with_v_below(2, 2, 2.0, rng);
  const TangentVector x = smp::random_tangent(2, 2, rng);
  CHECK(std::abs(covariant_hessian_fd([](const Matrix&) { return 3.0; }, p, x)) <= 1e-14);
  const GrassmannPoint o = GrassmannPoint::origin(2, 2);
  CHECK(covariant_hessian_fd(v_by_det, o, x) ==
        doctest::Approx(grassmann::metric_at(o, x, x)).epsilon(1e-6));
}

TEST_CASE("covariant Hessian converges at second order in the step") {
  smp::Rng rng(34);
  int fine_wins = 0;
  int total = 0;
  for (int k = 0; k < 10; ++k) {
    const GrassmannPoint p = smp::point_with_v_below(2, 2, 2.5, rng);
    const TangentVector x = smp::random_tangent(2, 2, rng);
    const double exact = grassmann::hess_v(p, x);
    const double e1 = std::abs(covariant_hessian_fd(v_by_det, p, x, 4e-3) - exact);
    const double e2 = std::abs(covariant_hessian_fd(v_by_det, p, x, 2e-3) - exact);
    ++total;
    if (e1 >= 3.0 * e2) ++fine_wins;
  }
  CHECK(fine_wins == total);
}

TEST_CASE("geodesics: zero length, the 1-d closed form, unit speed") {
  const GrassmannPoint o = GrassmannPoint::origin(1, 1);
  const TangentVector x{one(1.0)};
  CHECK(geodesic_shoot(o, x, 0.0).z()(0, 0) == 0.0);
  // On G(1,1) the arc length from the origin is arctan Z, so Z(s) = tan s.
  for (double s : {0.3, 0.8, 1.2}) {
    CHECK(geodesic_shoot(o, x, s).z()(0, 0) == doctest::Approx(std::tan(s)).epsilon(1e-8));
  }
  smp::Rng rng(35);
  for (int k = 0; k < 5; ++k) {
    const GrassmannPoint p = smp::point_with_v_below(2, 2, 1.5, rng);
    const TangentVector dir = unit_direction(p, smp::random_tangent(2, 2, rng));
    const GeodesicEnd end = geodesic_integrate(p, dir, 0.5);
    CHECK(end.max_speed_deviation <= 1e-6);
  }
  CHECK_THROWS_AS(geodesic_shoot(o, {one(2.0)}, 1.0), ValidationError);
}

TEST_CASE("geodesics are time reversible") {
  smp::Rng rng(36);
  for (int k = 0; k < 3; ++k) {
    const GrassmannPoint p = smp::point_with_v_below(2, 2, 1.5, rng);
    const TangentVector dir = unit_direction(p, smp::random_tangent(2, 2, rng));
    const GeodesicEnd fwd = geodesic_integrate(p, dir, 0.4);
    const TangentVector back{-fwd.velocity.x /
                             std::sqrt(grassmann::metric_at(fwd.point, fwd.velocity,
                                                            fwd.velocity))};
    const GrassmannPoint ret = geodesic_shoot(fwd.point, back, 0.4);
    CHECK((ret.z() - p.z()).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("chart exit carries the arc length reached") {
  const GrassmannPoint o = GrassmannPoint::origin(1, 1);
  try {
    geodesic_shoot(o, {one(1.0)}, 2.0);
    FAIL("expected a chart exit");
  } catch (const ChartExit& e) {
    CHECK(e.arc_length() > 1.4);
    CHECK(e.arc_length() < 1.58);
  }
}

TEST_CASE("shooting distance: origin, a single angle, distance lower bounds") {
  CHECK(distance_bruteforce(GrassmannPoint::origin(2, 2)) == 0.0);
  Matrix z = Matrix::Zero(2, 2);
  z(0, 1) = std::tan(0.9);
  CHECK(distance_bruteforce(GrassmannPoint(z)) == doctest::Approx(0.9).epsilon(1e-4));

  smp::Rng rng(37);
  for (int k = 0; k < 5; ++k) {
    const GrassmannPoint a = smp::point_with_rho_at_most(2, 2, 1.0, rng);
    const GrassmannPoint b = smp::point_with_rho_at_most(2, 2, 1.0, rng);
    const double da = distance_bruteforce(a);
    const double db = distance_bruteforce(b);
    CHECK(grassmann::rho_between(a, b) >= std::abs(da - db) - 1e-4);
  }
}
