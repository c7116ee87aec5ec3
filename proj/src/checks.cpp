/// @file checks.cpp
/// @brief Randomized scans of the closed-form kernel.

#include "grassflow/checks.hpp"

#include "grassflow/errors.hpp"
#include "grassflow/geom_oracle.hpp"
#include "grassflow/grassmann.hpp"
#include "grassflow/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace grassflow::checks {

namespace g = grassflow::grassmann;
namespace smp = grassflow::sampling;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// v from its defining determinant, independent of the kernel.
double v_by_det(const g::Matrix& z) {
  const Eigen::Index n = z.rows();
  return std::sqrt((g::Matrix::Identity(n, n) + z * z.transpose()).determinant());
}

// Scans share one shape: sample, evaluate a normalized value, compare.
template <class Body>
ScanResult lower_bound_scan(const std::string& name, long samples, std::uint64_t seed,
                            double tol, Body body) {
  const auto t0 = Clock::now();
  ScanResult r;
  r.name = name;
  r.tolerance = tol;
  r.worst = std::numeric_limits<double>::infinity();
  smp::Rng rng(seed);
  for (long k = 0; k < samples; ++k) {
    const double value = body(rng);
    ++r.samples;
    r.worst = std::min(r.worst, value);
    if (value < -tol) ++r.violations;
  }
  r.seconds = seconds_since(t0);
  r.pass = r.violations == 0;
  return r;
}

}  // namespace

ScanResult scan_hessian_vs_oracle(long samples, std::uint64_t seed) {
  const auto t0 = Clock::now();
  ScanResult r;
  r.name = "hessian_vs_oracle";
  r.tolerance = 1e-5;
  smp::Rng rng(seed);
  const oracle::ScalarFunction f = v_by_det;
  for (long k = 0; k < samples; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const g::GrassmannPoint p = smp::point_with_v_at_most(n, m, 3.0, rng);
    const g::TangentVector x = smp::random_tangent(n, m, rng);
    const double closed = g::hess_v(p, x);
    const double fd = oracle::covariant_hessian_fd(f, p, x);
    const double err = std::abs(closed - fd) / std::max(1.0, std::abs(closed));
    ++r.samples;
    r.worst = std::max(r.worst, err);
    if (!(err <= r.tolerance)) ++r.violations;
  }
  r.seconds = seconds_since(t0);
  r.pass = r.violations == 0;
  return r;
}

ScanResult scan_convexity_gap(long samples, std::uint64_t seed) {
  return lower_bound_scan("convexity_gap", samples, seed, 1e-8, [](smp::Rng& rng) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const g::GrassmannPoint p = smp::point_with_v_at_most(n, m, 2.0, rng);
    const g::TangentVector x = smp::random_tangent(n, m, rng);
    return g::v_convexity_gap(p, x) / g::metric_at(p, x, x);
  });
}

ScanResult scan_v32_bound(long samples, std::uint64_t seed) {
  return lower_bound_scan("v32_hessian_bound", samples, seed, 1e-8, [](smp::Rng& rng) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const g::GrassmannPoint p = smp::point_with_v_below(n, m, 2.0, rng);
    const g::TangentVector x = smp::random_tangent(n, m, rng);
    return g::hess_bound_v32(p, x) / g::metric_at(p, x, x);
  });
}

ScanResult scan_sec_bound(long samples, std::uint64_t seed) {
  return lower_bound_scan("sec_hessian_bound", samples, seed, 1e-8, [](smp::Rng& rng) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    g::GrassmannPoint p = smp::point_with_rho_at_most(n, m, g::kCriticalRadius, rng);
    while (!(g::rho_of(p) < g::kCriticalRadius)) {
      p = smp::point_with_rho_at_most(n, m, g::kCriticalRadius, rng);
    }
    const g::TangentVector x = smp::random_tangent(n, m, rng);
    return g::hess_bound_sec(p, x) / (g::barrier_sec(p) * g::metric_at(p, x, x));
  });
}

ScanResult scan_definiteness_boundary(long samples, std::uint64_t seed) {
  const auto t0 = Clock::now();
  ScanResult r;
  r.name = "definiteness_boundary";
  r.tolerance = 1e-3;  // allowed mismatch fraction
  smp::Rng rng(seed);
  long agree = 0;
  for (long k = 0; k < samples; ++k) {
    const int n = smp::uniform_int(2, 3, rng);
    const int m = smp::uniform_int(2, 3, rng);
    const g::GrassmannPoint p = smp::point_near_convex_boundary(n, m, 0.4, rng);
    if (!(std::abs(g::bjx_margin(p)) > 1e-6)) {
      ++r.skipped;
      continue;
    }
    ++r.samples;
    const bool definite = g::hess_v_min_eigen(p).first > 0.0;
    if (definite == g::in_bjx(p)) {
      ++agree;
    } else {
      ++r.violations;
    }
  }
  r.worst = r.samples > 0 ? static_cast<double>(agree) / r.samples : 0.0;
  r.seconds = seconds_since(t0);
  r.pass = r.samples > 0 && r.worst >= 1.0 - r.tolerance;
  return r;
}

ScanResult scan_sublevel_inclusion(long samples, std::uint64_t seed) {
  const auto t0 = Clock::now();
  ScanResult r;
  r.name = "sublevel_inclusion";
  smp::Rng rng(seed);
  r.worst = std::numeric_limits<double>::infinity();
  for (long k = 0; k < samples; ++k) {
    const int n = smp::uniform_int(1, 3, rng);
    const int m = smp::uniform_int(1, 3, rng);
    const g::GrassmannPoint p = smp::point_with_v_below(n, m, 2.0, rng);
    ++r.samples;
    r.worst = std::min(r.worst, g::bjx_margin(p));
    if (!g::in_bjx(p)) ++r.violations;
  }
  r.seconds = seconds_since(t0);
  r.pass = r.violations == 0;
  return r;
}

ScanResult scan_distance_vs_shooting(long samples, std::uint64_t seed) {
  const auto t0 = Clock::now();
  ScanResult r;
  r.name = "distance_vs_shooting";
  r.tolerance = 1e-4;
  smp::Rng rng(seed);
  for (long k = 0; k < samples; ++k) {
    const int n = smp::uniform_int(1, 2, rng);
    const int m = smp::uniform_int(1, 2, rng);
    const g::GrassmannPoint p = smp::point_with_rho_at_most(n, m, 1.2, rng);
    ++r.samples;
    double err = std::numeric_limits<double>::infinity();
    try {
      err = std::abs(g::rho_of(p) - oracle::distance_bruteforce(p));
    } catch (const OracleError&) {
    }
    r.worst = std::max(r.worst, err);
    if (!(err <= r.tolerance)) ++r.violations;
  }
  r.seconds = seconds_since(t0);
  r.pass = r.violations == 0;
  return r;
}

std::vector<ScanResult> kernel_scans(long samples, std::uint64_t seed) {
  return {scan_convexity_gap(samples, seed),
          scan_v32_bound(samples, seed + 1),
          scan_sec_bound(samples, seed + 2),
          scan_sublevel_inclusion(samples, seed + 3),
          scan_definiteness_boundary(std::max(1L, samples / 10), seed + 4)};
}

std::vector<ScanResult> oracle_scans(long hessian_samples, long distance_samples,
                                     std::uint64_t seed) {
  return {scan_hessian_vs_oracle(hessian_samples, seed),
          scan_distance_vs_shooting(distance_samples, seed + 1)};
}

}  // namespace grassflow::checks
