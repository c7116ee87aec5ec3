/// @file monitors.hpp
/// @brief Checks of evolution identities, maximum principles and curvature
/// estimates along a snapshot series produced by mcf::run.
///
/// Every monitor is a deterministic function of the series. Time derivatives
/// at fixed grid nodes use three-point Lagrange differences over neighboring
/// snapshots (one-sided at the ends). Identities stated along the parametric
/// flow dF/dt = H are converted with the tangential correction
///   d_param q = d_t q|grid - c^i d_i q,   c^i = g^{ij} <d_j f, d_t f>,
/// where d_t f is the semi-discrete velocity of the snapshot.
#pragma once

#include "grassflow/graph_mcf.hpp"
#include "grassflow/grassmann.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace grassflow::monitors {

using Series = std::vector<mcf::Frame>;

enum class Verdict { pass, fail, informational };
std::string to_string(Verdict v);

struct MonitorReport {
  std::string name;
  std::vector<double> times;
  /// Named per-snapshot series, in insertion order.
  std::vector<std::pair<std::string, std::vector<double>>> series;
  Verdict verdict = Verdict::informational;
  double tolerance = 0.0;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  std::string note;

  const std::vector<double>* find(const std::string& key) const;
  nlohmann::ordered_json to_json() const;
};

enum class Barrier { v, v32, sec };
std::string to_string(Barrier b);
/// "v", "v32" or "sec"; ValidationError otherwise.
Barrier parse_barrier(const std::string& name);

/// Pinned constant of the residual tolerance tau = C (h^2 + dt), h the largest
/// cell size and dt the largest snapshot interval. Calibrated on the sine
/// preset (n = m = 2) at N = 64.
inline constexpr double kResidualTauConstant = 2.0;

struct ResidualOptions {
  double tau_constant = kResidualTauConstant;
  /// Cells next to the seam excluded from fields that are not periodic.
  int seam_margin = 2;
};

/// Residual of (d/dt - Delta)|F|^2 = -2n with |F|^2 = |x - c|^2 + |f|^2
/// (c the cell center), on nodes away from the seam. Series key
/// "residual_max".
MonitorReport check_F2_identity(const Series& s, const ResidualOptions& opt = {});

/// Residual of (d/dt - Delta) h~ + sum_i Hess(h)(gamma_* e_i, gamma_* e_i) for
/// h~ = h(Df). Series key "residual_max". For the barrier v the left side is
/// also evaluated from sqrt(det g): the two fields must agree to 1e-12
/// relative, the two left sides to 1e-12 times the roundoff amplification of
/// the difference stencils (metadata "two_path_*").
MonitorReport check_composition_identity(const Series& s, Barrier barrier,
                                         const ResidualOptions& opt = {});

struct B2Options {
  /// Loose tolerance for the fourth-order monitor; without it the report
  /// records the slack only.
  std::optional<double> tau_loose;
  /// Allowance for |grad |B||^2 <= |grad B|^2, relative to max |grad B|^2.
  double kato_relative = 1e-2;
};

/// Slack -(d/dt - Delta)|B|^2 - 2 |grad |B||^2 + 3 |B|^4 per node; series keys
/// "slack_min" and "kato_excess_max". Informational.
MonitorReport check_B2_inequality(const Series& s, const B2Options& opt = {});

/// sup Delta_f < 2 and non-increasing within `relative` per interval.
/// PreconditionError when the initial sup is not below 2.
MonitorReport monitor_confinable(const Series& s, double relative = 1e-6);

/// Largest distance of the Gauss image from `center` stays <= R0 + tol.
/// Also records sup sec^2(sqrt2 rho) and whether it is non-increasing.
MonitorReport monitor_geodesic_ball(const Series& s,
                                    const grassmann::GrassmannPoint& center,
                                    double R0, double tol = 1e-9);

/// Partial Gauss maps of a surface in R^4 stay in the open hemispheres
/// fitted at t = 0. Informational when the fitted margin is below 1e-3.
MonitorReport monitor_hemisphere(const Series& s, double tol = 0.0);

/// sup |B|^2 h~ non-increasing within `relative` per interval.
MonitorReport monitor_B2h(const Series& s, Barrier barrier, double relative = 1e-3);

/// Empirical constant of the interior estimate
///   sup_{K(t, theta R)} |B|^2 <= C (1-theta^2)^{-2} (1/t + 1/R^2)
///                                  sup_{s<=t} sup_{K(s,R)} (2-Delta_f)^{-3},
/// K(t, R) the nodes with |x - c| < R. Pass/fail only when `bound` is given.
MonitorReport monitor_curvature_scaling(const Series& s, double theta, double R,
                                        std::optional<double> bound = std::nullopt);

/// (2 - Delta_f)^{-1} <= 2 C0 (|x - c|^2 + 2nt + 1)^a. Pass/fail for a = 0,
/// informational for a > 0.
MonitorReport monitor_growth_bound(const Series& s, double C0, double a);

/// Weights of the three-point derivative at times[k] (indices in `idx`).
struct TimeStencil {
  int idx[3];
  double w[3];
};
TimeStencil time_stencil(const std::vector<double>& times, std::size_t k);

}  // namespace grassflow::monitors
