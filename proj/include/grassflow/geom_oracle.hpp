/// @file geom_oracle.hpp
/// @brief Finite-difference Riemannian geometry on G(n,m) in Z-coordinates.
///
/// Ground truth for the closed forms in grassmann.hpp. Nothing in here calls
/// the closed-form Hessians; the metric is evaluated from its defining trace
/// formula and differentiated numerically.
#pragma once

#include "grassflow/errors.hpp"
#include "grassflow/grassmann.hpp"

#include <functional>
#include <string>
#include <vector>

namespace grassflow::oracle {

using grassmann::GrassmannPoint;
using grassmann::Matrix;
using grassmann::TangentVector;
using grassmann::Vector;

/// Z -> nm x nm Gram matrix of the coordinate basis (row-major flattening).
struct MetricField {
  std::function<Matrix(const Matrix&)> evaluator;
  double step = 1e-4;
};

/// The canonical metric tr((I+ZZ^T)^{-1} dZ (I+Z^TZ)^{-1} dZ^T).
MetricField canonical_metric(double step = 1e-4);

/// Christoffel symbols of the second kind, Gamma^c_{ab} at index
/// (c * N + a) * N + b with N = nm.
struct Christoffels {
  int dim = 0;
  std::vector<double> data;
  double operator()(int c, int a, int b) const {
    return data[(static_cast<std::size_t>(c) * dim + a) * dim + b];
  }
};

/// Central differences of the metric; throws OracleError if the Gram matrix
/// has condition number above 1e10.
Christoffels christoffels_fd(const MetricField& mf, const GrassmannPoint& p);

using ScalarFunction = std::function<double(const Matrix&)>;

/// Hess(f)(x,x) = x^a x^b (d_a d_b f - Gamma^c_ab d_c f), all derivatives by
/// central differences with the metric field's step.
double covariant_hessian_fd(const MetricField& mf, const ScalarFunction& f,
                            const GrassmannPoint& p, const TangentVector& x);

/// Convenience overload using canonical_metric(step).
double covariant_hessian_fd(const ScalarFunction& f, const GrassmannPoint& p,
                            const TangentVector& x, double step = 1e-4);

/// Thrown when a geodesic leaves the chart; carries the arc length reached.
class ChartExit : public OracleError {
 public:
  ChartExit(const std::string& what, double arc_length)
      : OracleError(what), arc_length_(arc_length) {}
  double arc_length() const { return arc_length_; }

 private:
  double arc_length_;
};

struct GeodesicEnd {
  GrassmannPoint point;
  TangentVector velocity;
  double max_speed_deviation = 0.0;  ///< max |g(zdot, zdot)^{1/2} - 1|
};

/// Classic RK4 on z'' + Gamma(z', z') = 0 with step <= max_step. Requires
/// metric_at(p0, x, x) = 1 to 1e-8.
GeodesicEnd geodesic_integrate(const GrassmannPoint& p0, const TangentVector& x,
                               double length, double max_step = 1e-3);

GrassmannPoint geodesic_shoot(const GrassmannPoint& p0, const TangentVector& x,
                              double length, double max_step = 1e-3);

struct ShootingResult {
  double distance = 0.0;
  int iterations = 0;
  double endpoint_error = 0.0;  ///< max-abs coordinate mismatch
};

/// Distance from P0 by Newton shooting from Z = 0. The initial guess is the
/// straight chart direction toward p. Throws OracleError without convergence
/// to 1e-6 in 100 iterations.
ShootingResult distance_bruteforce_detailed(const GrassmannPoint& p);
double distance_bruteforce(const GrassmannPoint& p);

}  // namespace grassflow::oracle
