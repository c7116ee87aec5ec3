/// @file checks.hpp
/// @brief Seeded randomized scans of the Grassmannian kernel against its
/// inequalities and against the finite-difference oracle.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace grassflow::checks {

struct ScanResult {
  std::string name;
  long samples = 0;     ///< samples evaluated
  long skipped = 0;     ///< samples excluded by the scan's own rule
  long violations = 0;
  /// Worst normalized value: the smallest gap / g(x,x) for inequality scans,
  /// the largest relative error for oracle comparisons.
  double worst = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  bool pass = false;
};

/// |hess_v - FD covariant Hessian| <= 1e-5 max(1, |hess_v|); n, m in 1..3,
/// v <= 3.
ScanResult scan_hessian_vs_oracle(long samples, std::uint64_t seed);

/// Convexity gap of v >= -1e-8 g(x,x) on the closed set {v <= 2}.
ScanResult scan_convexity_gap(long samples, std::uint64_t seed);

/// Hessian bound of h = (v / (2 - v))^{3/2} >= -1e-8 g(x,x) on {v < 2}.
ScanResult scan_v32_bound(long samples, std::uint64_t seed);

/// Same bound for h = sec^2(sqrt2 rho) inside the critical geodesic ball,
/// normalized by h g(x,x).
ScanResult scan_sec_bound(long samples, std::uint64_t seed);

/// Sign of the smallest eigenvalue of Hess(v) against the convex-region test,
/// on samples straddling its boundary; samples with margin <= 1e-6 are
/// skipped. Passes at >= 99.9% agreement.
ScanResult scan_definiteness_boundary(long samples, std::uint64_t seed);

/// Every sample with v < 2 lies in the convex region.
ScanResult scan_sublevel_inclusion(long samples, std::uint64_t seed);

/// rho_of against Newton shooting, n, m <= 2, rho <= 1.2, within 1e-4.
ScanResult scan_distance_vs_shooting(long samples, std::uint64_t seed);

/// All scans of the "grassmann-check" mode, in a fixed order.
std::vector<ScanResult> kernel_scans(long samples, std::uint64_t seed);
/// All scans of the "hessian-check" mode.
std::vector<ScanResult> oracle_scans(long hessian_samples, long distance_samples,
                                     std::uint64_t seed);

}  // namespace grassflow::checks
