/// @file grassmann.cpp
/// @brief Closed-form Grassmannian kernel.

#include "grassflow/grassmann.hpp"

#include "grassflow/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace grassflow::grassmann {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

JordanSpectrum compute_spectrum(const Matrix& z) {
  Eigen::JacobiSVD<Matrix> svd(z, Eigen::ComputeFullU | Eigen::ComputeFullV);
  JordanSpectrum js;
  const Vector& s = svd.singularValues();
  js.theta.resize(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) js.theta(k) = std::atan(s(k));
  js.u = svd.matrixU();
  js.q = svd.matrixV();
  return js;
}

// tan(theta) padded with zeros to `len` entries.
Vector padded_tan(const Vector& theta, Eigen::Index len) {
  Vector lam = Vector::Zero(len);
  for (Eigen::Index k = 0; k < theta.size() && k < len; ++k) {
    lam(k) = std::tan(theta(k));
  }
  return lam;
}

// v from the angles; used only where the spectrum is already at hand.
double v_from_angles(const Vector& theta) {
  double v = 1.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) v /= std::cos(theta(k));
  return v;
}

// Closed-form Hess(v) as a symmetric bilinear form on omega components.
double hess_v_form(const JordanSpectrum& js, double v, const Matrix& w1,
                   const Matrix& w2) {
  const Eigen::Index n = w1.rows();
  const Eigen::Index m = w1.cols();
  const Eigen::Index p = js.theta.size();
  const Vector lam = padded_tan(js.theta, p);

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < m; ++a) {
      if (i >= p || a >= p) total += v * w1(i, a) * w2(i, a);
    }
  }
  double dv1 = 0.0;
  double dv2 = 0.0;
  for (Eigen::Index a = 0; a < p; ++a) {
    total += (1.0 + lam(a) * lam(a)) * v * w1(a, a) * w2(a, a);
    dv1 += lam(a) * w1(a, a);
    dv2 += lam(a) * w2(a, a);
    for (Eigen::Index b = a + 1; b < p; ++b) {
      const double ll = lam(a) * lam(b);
      const double sym1 = (w1(a, b) + w1(b, a));
      const double sym2 = (w2(a, b) + w2(b, a));
      const double anti1 = (w1(a, b) - w1(b, a));
      const double anti2 = (w2(a, b) - w2(b, a));
      total += 0.5 * v * ((1.0 + ll) * sym1 * sym2 + (1.0 - ll) * anti1 * anti2);
    }
  }
  // v^{-1} dv (x) dv with dv = v * sum lam_a omega_aa
  total += v * dv1 * dv2;
  return total;
}

// c cot c, continuous at 0.
double c_cot_c(double c) {
  if (std::abs(c) < 1e-12) return 1.0;
  return c / std::tan(c);
}

void require_same_shape(const GrassmannPoint& p, const TangentVector& x) {
  if (x.x.rows() != p.n() || x.x.cols() != p.m()) {
    throw ValidationError("tangent vector shape " + std::to_string(x.x.rows()) +
                          "x" + std::to_string(x.x.cols()) +
                          " does not match point " + std::to_string(p.n()) +
                          "x" + std::to_string(p.m()));
  }
}

struct V32Derivatives {
  double h, h1, h2;
};

V32Derivatives v32_derivatives(double v) {
  if (!(v < 2.0)) {
    throw DomainError("barrier undefined: v = " + std::to_string(v) +
                      " >= 2");
  }
  const double s = 2.0 - v;
  V32Derivatives d;
  d.h = std::pow(v / s, 1.5);
  d.h1 = 3.0 * std::sqrt(v) * std::pow(s, -2.5);
  d.h2 = 1.5 / std::sqrt(v) * std::pow(s, -2.5) +
         7.5 * std::sqrt(v) * std::pow(s, -3.5);
  return d;
}

// h(rho) = sec^2(sqrt2 rho) written as a function of s = rho^2 / 2:
//   dh = A ds,  Hess h = A Hess s + Bc ds (x) ds.
struct SecDerivatives {
  double h, a, bc;
};

SecDerivatives sec_derivatives(double rho) {
  if (!(rho < kCriticalRadius)) {
    throw DomainError("outside geodesic ball: rho = " + std::to_string(rho) +
                      " >= sqrt(2) pi / 4");
  }
  const double u = std::sqrt(2.0) * rho;
  const double sec2 = 1.0 / (std::cos(u) * std::cos(u));
  const double tn = std::tan(u);
  SecDerivatives d;
  d.h = sec2;
  if (rho < 1e-3) {
    const double r2 = rho * rho;
    d.a = 4.0 + (32.0 / 3.0) * r2 + (272.0 / 15.0) * r2 * r2;
    d.bc = 64.0 / 3.0 + (1088.0 / 15.0) * r2;
  } else {
    d.a = 4.0 * sec2 * tn / u;
    const double h_rr = 8.0 * sec2 * tn * tn + 4.0 * sec2 * sec2;
    d.bc = (h_rr - d.a) / (rho * rho);
  }
  return d;
}

}  // namespace

GrassmannPoint::GrassmannPoint(Matrix z) : z_(std::move(z)) {
  if (z_.rows() < 1 || z_.cols() < 1) {
    throw ValidationError("GrassmannPoint needs n, m >= 1");
  }
  if (!z_.allFinite()) throw ValidationError("GrassmannPoint: non-finite Z");
  jordan_ = compute_spectrum(z_);
}

void require_orthonormal_rows(const Matrix& frame, double tol) {
  const Matrix gram = frame * frame.transpose();
  const double dev =
      (gram - Matrix::Identity(frame.rows(), frame.rows())).cwiseAbs().maxCoeff();
  if (!(dev <= tol)) {
    throw ValidationError("frame rows are not orthonormal (Gram deviation " +
                          std::to_string(dev) + ")");
  }
}

Matrix orthonormalize_rows(const Matrix& rows) {
  Matrix out = rows;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < i; ++j) {
        out.row(i) -= out.row(i).dot(out.row(j)) * out.row(j);
      }
    }
    const double nrm = out.row(i).norm();
    if (!(nrm > 1e-14 * std::max(1.0, rows.row(i).norm()))) {
      throw ValidationError("orthonormalize_rows: rank-deficient input");
    }
    out.row(i) /= nrm;
  }
  return out;
}

Matrix frame_of(const GrassmannPoint& p) {
  Matrix rows(p.n(), p.n() + p.m());
  rows << Matrix::Identity(p.n(), p.n()), p.z();
  return orthonormalize_rows(rows);
}

Matrix orthogonal_completion(const Matrix& frame) {
  const Eigen::Index n = frame.rows();
  const Eigen::Index d = frame.cols();
  Matrix basis(d, d);
  basis.topRows(n) = frame;
  for (Eigen::Index k = n; k < d; ++k) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    Vector best_vec;
    for (Eigen::Index e = 0; e < d; ++e) {
      Vector r = Vector::Unit(d, e);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < k; ++j) {
          r -= r.dot(basis.row(j)) * basis.row(j).transpose();
        }
      }
      const double nrm = r.norm();
      if (nrm > best_norm + 1e-12) {
        best = e;
        best_norm = nrm;
        best_vec = r;
      }
    }
    if (best < 0 || best_norm < 1e-8) {
      throw ValidationError("orthogonal_completion: degenerate frame");
    }
    basis.row(k) = best_vec.transpose() / best_norm;
  }
  return basis.bottomRows(d - n);
}

double w_of(const FramePair& fp) {
  if (fp.p_frame.rows() != fp.p0_frame.rows() ||
      fp.p_frame.cols() != fp.p0_frame.cols() ||
      fp.p_frame.cols() <= fp.p_frame.rows()) {
    throw ValidationError("w_of: frames must both be n x (n+m) with m >= 1");
  }
  require_orthonormal_rows(fp.p_frame);
  require_orthonormal_rows(fp.p0_frame);
  const Matrix w = fp.p_frame * fp.p0_frame.transpose();
  return w.determinant();
}

GrassmannPoint coords_of(const FramePair& fp) {
  const double w = w_of(fp);
  if (!(w > 0.0)) {
    throw DomainError("outside coordinate chart U: w = " + std::to_string(w));
  }
  const Matrix normal = orthogonal_completion(fp.p0_frame);
  const Matrix wm = fp.p_frame * fp.p0_frame.transpose();
  const Matrix bm = fp.p_frame * normal.transpose();
  return GrassmannPoint(wm.partialPivLu().solve(bm));
}

double v_of(const GrassmannPoint& p) {
  const Matrix a =
      Matrix::Identity(p.n(), p.n()) + p.z() * p.z().transpose();
  Eigen::LLT<Matrix> llt(a);
  // det(A) = prod L_ii^2, so sqrt(det A) = prod L_ii.
  double v = 1.0;
  const Matrix& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < a.rows(); ++i) v *= l(i, i);
  return v;
}

JordanSpectrum jordan_of(const GrassmannPoint& p) { return p.jordan(); }

double metric_at(const GrassmannPoint& p, const TangentVector& x1,
                 const TangentVector& x2) {
  require_same_shape(p, x1);
  require_same_shape(p, x2);
  const Matrix& z = p.z();
  const Matrix a = Matrix::Identity(p.n(), p.n()) + z * z.transpose();
  const Matrix b = Matrix::Identity(p.m(), p.m()) + z.transpose() * z;
  const Matrix ax1 = a.llt().solve(x1.x);
  const Matrix x2b = b.llt().solve(x2.x.transpose());  // (B^{-1} x2^T)
  return (ax1 * x2b).trace();
}

Matrix metric_matrix(const GrassmannPoint& p) {
  const int n = p.n();
  const int m = p.m();
  const Matrix& z = p.z();
  const Matrix ai =
      (Matrix::Identity(n, n) + z * z.transpose()).inverse();
  const Matrix bi =
      (Matrix::Identity(m, m) + z.transpose() * z).inverse();
  Matrix g(n * m, n * m);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < n; ++j)
        for (int b = 0; b < m; ++b) g(i * m + a, j * m + b) = ai(i, j) * bi(a, b);
  return g;
}

Matrix omega_components(const JordanSpectrum& js, const TangentVector& x) {
  const Eigen::Index n = x.x.rows();
  const Eigen::Index m = x.x.cols();
  const Vector lr = padded_tan(js.theta, n);
  const Vector lc = padded_tan(js.theta, m);
  Matrix w = js.u.transpose() * x.x * js.q;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < m; ++a)
      w(i, a) /= std::sqrt((1.0 + lr(i) * lr(i)) * (1.0 + lc(a) * lc(a)));
  return w;
}

double dv_at(const GrassmannPoint& p, const TangentVector& x) {
  require_same_shape(p, x);
  const Matrix& z = p.z();
  const Matrix a = Matrix::Identity(p.n(), p.n()) + z * z.transpose();
  // Jacobi: d log det A = tr(A^{-1} dA), dA = x z^T + z x^T.
  const double dlogv = (a.llt().solve(z) * x.x.transpose()).trace();
  return v_of(p) * dlogv;
}

double hess_v(const GrassmannPoint& p, const TangentVector& x) {
  return hess_v(p, p.jordan(), x);
}

double hess_v(const GrassmannPoint& p, const JordanSpectrum& js,
              const TangentVector& x) {
  require_same_shape(p, x);
  const Matrix w = omega_components(js, x);
  return hess_v_form(js, v_from_angles(js.theta), w, w);
}

double hess_v_bilinear(const GrassmannPoint& p, const TangentVector& x,
                       const TangentVector& y) {
  const TangentVector plus{x.x + y.x};
  const TangentVector minus{x.x - y.x};
  return 0.25 * (hess_v(p, plus) - hess_v(p, minus));
}

Matrix hess_v_matrix(const GrassmannPoint& p) {
  const int n = p.n();
  const int m = p.m();
  const int dim = n * m;
  const JordanSpectrum& js = p.jordan();
  const double v = v_from_angles(js.theta);
  std::vector<Matrix> w(dim);
  for (int k = 0; k < dim; ++k) {
    TangentVector e{Matrix::Zero(n, m)};
    e.x(k / m, k % m) = 1.0;
    w[k] = omega_components(js, e);
  }
  Matrix h(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b) h(a, b) = h(b, a) = hess_v_form(js, v, w[a], w[b]);
  return h;
}

std::pair<double, TangentVector> hess_v_min_eigen(const GrassmannPoint& p) {
  const Matrix h = hess_v_matrix(p);
  const Matrix g = metric_matrix(p);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(h, g);
  const Vector vec = es.eigenvectors().col(0);
  TangentVector dir{Matrix(p.n(), p.m())};
  for (int k = 0; k < p.n() * p.m(); ++k) dir.x(k / p.m(), k % p.m()) = vec(k);
  return {es.eigenvalues()(0), dir};
}

double v_convexity_coefficient(double v, int p) {
  const double pd = static_cast<double>(p);
  double first;
  if (std::abs(v - 1.0) < 1e-6) {
    first = 1.0 / (2.0 * v);
  } else {
    const double vp = std::expm1((2.0 / pd) * std::log1p(v - 1.0));
    first = (v - 1.0) / (pd * v * vp);
  }
  return first + (pd + 1.0) / (pd * v);
}

double v_convexity_gap(const GrassmannPoint& p, const TangentVector& x) {
  const double v = v_of(p);
  if (v > 2.0 * (1.0 + 1e-12)) {
    throw DomainError("outside closed sub-level set {v <= 2}, bound not "
                      "asserted: v = " + std::to_string(v));
  }
  const double g = metric_at(p, x, x);
  const double dv = dv_at(p, x);
  const double c = v_convexity_coefficient(v, p.p());
  return hess_v(p, x) - (v * (2.0 - v) * g + c * dv * dv);
}

double rho_of(const GrassmannPoint& p) { return p.jordan().theta.norm(); }

double d_half_rho_sq(const GrassmannPoint& p, const TangentVector& x) {
  require_same_shape(p, x);
  const JordanSpectrum& js = p.jordan();
  const Matrix w = omega_components(js, x);
  double s = 0.0;
  for (Eigen::Index a = 0; a < js.theta.size(); ++a) s += js.theta(a) * w(a, a);
  return s;
}

double hess_half_rho_sq(const GrassmannPoint& p, const TangentVector& x) {
  require_same_shape(p, x);
  const JordanSpectrum& js = p.jordan();
  const Matrix w = omega_components(js, x);
  const Eigen::Index n = w.rows();
  const Eigen::Index m = w.cols();
  const Eigen::Index np = js.theta.size();
  const Vector& th = js.theta;

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < m; ++a) {
      if (i >= np && a < np) {
        total += c_cot_c(th(a)) * w(i, a) * w(i, a);
      } else if (a >= np && i < np) {
        total += c_cot_c(th(i)) * w(i, a) * w(i, a);
      }
    }
  }
  for (Eigen::Index a = 0; a < np; ++a) {
    total += w(a, a) * w(a, a);
    for (Eigen::Index b = a + 1; b < np; ++b) {
      const double sym = w(a, b) + w(b, a);
      const double anti = w(a, b) - w(b, a);
      total += 0.5 * (c_cot_c(th(a) - th(b)) * sym * sym +
                      c_cot_c(th(a) + th(b)) * anti * anti);
    }
  }
  return total;
}

double rho_between(const GrassmannPoint& a, const GrassmannPoint& b) {
  if (a.z().isZero(0.0)) return rho_of(b);
  return rho_of(coords_of(FramePair{frame_of(b), frame_of(a)}));
}

double barrier_v32(const GrassmannPoint& p) {
  return v32_derivatives(v_of(p)).h;
}

double d_barrier_v32(const GrassmannPoint& p, const TangentVector& x) {
  return v32_derivatives(v_of(p)).h1 * dv_at(p, x);
}

double hess_barrier_v32(const GrassmannPoint& p, const TangentVector& x) {
  const V32Derivatives d = v32_derivatives(v_of(p));
  const double dv = dv_at(p, x);
  return d.h1 * hess_v(p, x) + d.h2 * dv * dv;
}

double hess_bound_v32(const GrassmannPoint& p, const TangentVector& x) {
  const V32Derivatives d = v32_derivatives(v_of(p));
  const double dv = dv_at(p, x);
  const double dh = d.h1 * dv;
  const double hess = d.h1 * hess_v(p, x) + d.h2 * dv * dv;
  return hess - (3.0 * d.h * metric_at(p, x, x) + 1.5 * dh * dh / d.h);
}

double barrier_sec(const GrassmannPoint& p) {
  return sec_derivatives(rho_of(p)).h;
}

double d_barrier_sec(const GrassmannPoint& p, const TangentVector& x) {
  return sec_derivatives(rho_of(p)).a * d_half_rho_sq(p, x);
}

double hess_barrier_sec(const GrassmannPoint& p, const TangentVector& x) {
  const SecDerivatives d = sec_derivatives(rho_of(p));
  const double ds = d_half_rho_sq(p, x);
  return d.a * hess_half_rho_sq(p, x) + d.bc * ds * ds;
}

double hess_bound_sec(const GrassmannPoint& p, const TangentVector& x) {
  const SecDerivatives d = sec_derivatives(rho_of(p));
  const double ds = d_half_rho_sq(p, x);
  const double dh = d.a * ds;
  const double hess = d.a * hess_half_rho_sq(p, x) + d.bc * ds * ds;
  return hess - (3.0 * d.h * metric_at(p, x, x) + 1.5 * dh * dh / d.h);
}

bool in_bjx(const GrassmannPoint& p) {
  const Vector& th = p.jordan().theta;
  if (th.size() < 2) return th(0) < kHalfPi;
  return th(0) + th(1) < kHalfPi;
}

double bjx_margin(const GrassmannPoint& p) {
  const Vector& th = p.jordan().theta;
  if (th.size() < 2) return std::numeric_limits<double>::infinity();
  return kHalfPi - (th(0) + th(1));
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> s2xs2_split(const Matrix& frame) {
  if (frame.rows() != 2 || frame.cols() != 4) {
    throw ValidationError("s2xs2_split needs a 2 x 4 frame");
  }
  require_orthonormal_rows(frame);
  auto wedge = [&](int a, int b) {
    return frame(0, a) * frame(1, b) - frame(0, b) * frame(1, a);
  };
  const double w12 = wedge(0, 1), w13 = wedge(0, 2), w14 = wedge(0, 3);
  const double w23 = wedge(1, 2), w24 = wedge(1, 3), w34 = wedge(2, 3);
  Eigen::Vector3d sd(w12 + w34, w13 - w24, w14 + w23);
  Eigen::Vector3d asd(w12 - w34, w13 + w24, w14 - w23);
  sd.normalize();
  asd.normalize();
  return {sd, asd};
}

}  // namespace grassflow::grassmann
