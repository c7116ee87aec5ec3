/// @file grassmann.hpp
/// @brief Closed-form geometry of the Grassmannian G(n,m) in the affine chart
/// around a fixed reference plane P0.
///
/// A plane P with w = <P, P0> > 0 is spanned by the rows of [I_n | Z]; Z is
/// its chart coordinate. Everything here is a pure function of immutable
/// inputs.
///
/// Conventions used throughout:
///   - TangentVector::x is an n x m matrix, coefficients of the coordinate
///     basis E_{i alpha}.
///   - Flattened indices are row-major: a = i * m + alpha.
///   - Jordan angles are sorted nonincreasing, tan(theta) = singular values
///     of Z.
#pragma once

#include <Eigen/Dense>

#include <utility>

namespace grassflow::grassmann {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Principal (Jordan) angles between P and P0 together with the singular
/// directions of Z: z = u * diag(tan theta) * q^T, diagonal padded to n x m.
struct JordanSpectrum {
  Vector theta;  ///< p = min(n, m) angles in [0, pi/2), nonincreasing
  Matrix u;      ///< n x n orthogonal
  Matrix q;      ///< m x m orthogonal
};

/// A point of the chart U = {w > 0}. The Jordan data is computed once at
/// construction.
class GrassmannPoint {
 public:
  GrassmannPoint() : GrassmannPoint(Matrix::Zero(1, 1)) {}
  explicit GrassmannPoint(Matrix z);

  static GrassmannPoint origin(int n, int m) {
    return GrassmannPoint(Matrix::Zero(n, m));
  }

  const Matrix& z() const { return z_; }
  int n() const { return static_cast<int>(z_.rows()); }
  int m() const { return static_cast<int>(z_.cols()); }
  int p() const { return std::min(n(), m()); }
  const JordanSpectrum& jordan() const { return jordan_; }

 private:
  Matrix z_;
  JordanSpectrum jordan_;
};

struct TangentVector {
  Matrix x;
};

/// Two n-planes in R^{n+m}, each given by n orthonormal rows.
struct FramePair {
  Matrix p_frame;
  Matrix p0_frame;
};

// --- frames -----------------------------------------------------------------

/// Throws ValidationError if the Gram matrix of the rows deviates from the
/// identity by more than `tol` (max-abs entry).
void require_orthonormal_rows(const Matrix& frame, double tol = 1e-9);

/// Gram-Schmidt on the rows (modified, two passes). Throws ValidationError on
/// rank deficiency.
Matrix orthonormalize_rows(const Matrix& rows);

/// Orthonormal rows spanning the plane with chart coordinate z relative to the
/// standard reference plane span(e_1..e_n). Orientation matches [I | Z].
Matrix frame_of(const GrassmannPoint& p);

/// m orthonormal rows completing `frame` to an orthonormal basis of
/// R^{n+m}. Deterministic: greedily projects standard basis vectors, taking
/// the largest residual first (lowest index on ties).
Matrix orthogonal_completion(const Matrix& frame);

// --- the functions w, v and the Jordan angles --------------------------------

/// w = det W with W_ij = <e_i, eps_j>.
double w_of(const FramePair& fp);

/// Chart coordinate of fp.p_frame relative to fp.p0_frame, using
/// orthogonal_completion(p0_frame) as the complementary basis.
/// Throws DomainError when w <= 0.
GrassmannPoint coords_of(const FramePair& fp);

/// v = det(I + z z^T)^{1/2}, via Cholesky.
double v_of(const GrassmannPoint& p);

JordanSpectrum jordan_of(const GrassmannPoint& p);

// --- metric and derivatives of v --------------------------------------------

/// tr((I + ZZ^T)^{-1} x1 (I + Z^TZ)^{-1} x2^T).
double metric_at(const GrassmannPoint& p, const TangentVector& x1,
                 const TangentVector& x2);

/// Gram matrix of the coordinate basis, nm x nm, row-major flattening.
Matrix metric_matrix(const GrassmannPoint& p);

/// Components of x in the orthonormal frame built from the singular basis of
/// z: omega_{i alpha} = (u^T x q)_{i alpha} / sqrt((1+l_i^2)(1+l_alpha^2)).
Matrix omega_components(const JordanSpectrum& js, const TangentVector& x);

double dv_at(const GrassmannPoint& p, const TangentVector& x);

/// Hess(v)(x, x) from the closed form in the orthonormal singular frame.
double hess_v(const GrassmannPoint& p, const TangentVector& x);

/// Same as above but with an explicitly supplied singular pair (u, q) of z.
/// Any valid pair gives the same value; used to check gauge invariance.
double hess_v(const GrassmannPoint& p, const JordanSpectrum& js,
              const TangentVector& x);

/// Symmetric bilinear extension of hess_v by polarization.
double hess_v_bilinear(const GrassmannPoint& p, const TangentVector& x,
                       const TangentVector& y);

/// Hess(v) as an nm x nm matrix in the coordinate basis.
Matrix hess_v_matrix(const GrassmannPoint& p);

/// Smallest generalized eigenvalue of Hess(v) relative to the metric
/// together with its eigenvector (as an n x m direction).
std::pair<double, TangentVector> hess_v_min_eigen(const GrassmannPoint& p);

/// Hess(v)(x,x) - [v(2-v) g(x,x) + c(v,p) dv(x)^2] with
/// c = (v-1)/(p v (v^{2/p}-1)) + (p+1)/(p v).
/// Nonnegative on the closed sub-level set {v <= 2}; DomainError for v > 2.
double v_convexity_gap(const GrassmannPoint& p, const TangentVector& x);

/// The coefficient c(v, p) above, with its removable singularity at v = 1
/// filled by the limit 1/(2v) of the first term.
double v_convexity_coefficient(double v, int p);

// --- distance from P0 ---------------------------------------------------------

/// Geodesic distance from P0: sqrt(sum theta_alpha^2).
double rho_of(const GrassmannPoint& p);

/// d(rho^2 / 2)(x) = sum theta_alpha omega_{alpha alpha}(x).
double d_half_rho_sq(const GrassmannPoint& p, const TangentVector& x);

/// Hess(rho^2 / 2)(x, x) in closed form: eigenvalue c cot c on each Jacobi
/// direction, c in {0, theta_alpha, theta_alpha +- theta_beta}.
double hess_half_rho_sq(const GrassmannPoint& p, const TangentVector& x);

/// Distance between two chart points (re-charts b around a).
double rho_between(const GrassmannPoint& a, const GrassmannPoint& b);

// --- barrier functions ----------------------------------------------------------

/// h = v^{3/2} (2 - v)^{-3/2}; DomainError for v >= 2.
double barrier_v32(const GrassmannPoint& p);
double d_barrier_v32(const GrassmannPoint& p, const TangentVector& x);
double hess_barrier_v32(const GrassmannPoint& p, const TangentVector& x);
/// Hess(h)(x,x) - [3 h g(x,x) + (3/2) h^{-1} dh(x)^2].
double hess_bound_v32(const GrassmannPoint& p, const TangentVector& x);

/// sqrt(2) pi / 4: the radius at which sec^2(sqrt(2) rho) blows up.
inline constexpr double kCriticalRadius = 1.1107207345395915;

/// h = sec^2(sqrt(2) rho); DomainError for rho >= kCriticalRadius.
double barrier_sec(const GrassmannPoint& p);
double d_barrier_sec(const GrassmannPoint& p, const TangentVector& x);
double hess_barrier_sec(const GrassmannPoint& p, const TangentVector& x);
double hess_bound_sec(const GrassmannPoint& p, const TangentVector& x);

// --- convex region ----------------------------------------------------------------

/// theta_alpha + theta_beta < pi/2 for all alpha != beta.
bool in_bjx(const GrassmannPoint& p);

/// pi/2 - (theta_1 + theta_2): signed distance to the boundary of the convex
/// region in angle space (+infinity when p = 1).
double bjx_margin(const GrassmannPoint& p);

// --- G(2,2) = S^2 x S^2 ------------------------------------------------------------

/// Self-dual / anti-self-dual parts of e_1 ^ e_2 for a 2 x 4 orthonormal
/// frame, each scaled to the unit sphere. Component order of the first factor:
/// (w12 + w34, w13 - w24, w14 + w23); second: (w12 - w34, w13 + w24, w14 - w23).
std::pair<Eigen::Vector3d, Eigen::Vector3d> s2xs2_split(const Matrix& frame);

}  // namespace grassflow::grassmann
