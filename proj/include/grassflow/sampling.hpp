/// @file sampling.hpp
/// @brief Seeded random samplers on G(n,m) used by the randomized scans.
#pragma once

#include "grassflow/grassmann.hpp"

#include <random>

namespace grassflow::sampling {

using grassmann::FramePair;
using grassmann::GrassmannPoint;
using grassmann::Matrix;
using grassmann::TangentVector;
using grassmann::Vector;
using Rng = std::mt19937_64;

/// Haar-distributed k x k orthogonal matrix (QR of a Gaussian matrix with
/// the sign of R's diagonal fixed).
Matrix random_orthogonal(int k, Rng& rng);

/// z = u diag(tan theta) q^T with random u, q; theta may be in any order.
GrassmannPoint point_with_angles(int n, int m, const Vector& theta, Rng& rng);

/// Random angle direction rescaled so that v equals a target drawn uniformly
/// from [1, v_max], with 5% of draws exactly on v = v_max.
GrassmannPoint point_with_v_at_most(int n, int m, double v_max, Rng& rng);

/// Same, with v drawn uniformly from [1, v_max) (never equal to v_max).
GrassmannPoint point_with_v_below(int n, int m, double v_max, Rng& rng);

/// Random angle direction with rho = sqrt(sum theta^2) uniform in
/// [0, rho_max]. Requires each angle to stay below pi/2.
GrassmannPoint point_with_rho_at_most(int n, int m, double rho_max, Rng& rng);

/// Two largest angles with theta_1 + theta_2 = pi/2 + delta, delta uniform in
/// [-spread, spread]; requires min(n, m) >= 2.
GrassmannPoint point_near_convex_boundary(int n, int m, double spread, Rng& rng);

/// Gaussian entries.
TangentVector random_tangent(int n, int m, Rng& rng);

/// Two random orthonormal n-frames in R^{n+m}, oriented so that w > 0.
FramePair random_frame_pair(int n, int m, Rng& rng);

/// Uniform integer in [lo, hi].
int uniform_int(int lo, int hi, Rng& rng);

}  // namespace grassflow::sampling
