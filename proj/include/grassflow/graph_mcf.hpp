/// @file graph_mcf.hpp
/// @brief Nonparametric mean curvature flow of graphs f: T^n -> R^m on a
/// periodic grid, d f / dt = g^{ij} d_i d_j f, with the full extrinsic
/// geometry of the graph at every node.
///
/// Grid values may carry a constant linear part ("tilt"): crossing the seam
/// along axis i adds L_i * tilt.row(i). This is how affine graphs live on the
/// torus. All spatial stencils are second-order central differences.
#pragma once

#include "grassflow/grassmann.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace grassflow::mcf {

using grassmann::Matrix;
using grassmann::Vector;

struct GridSpec {
  int n = 1;                    ///< base dimension, 1..3
  int m = 1;                    ///< codimension, 1..3
  std::vector<int> cells;       ///< N_i per axis, 8..512
  std::vector<double> period;   ///< L_i per axis
  std::vector<double> origin;   ///< coordinate of node 0 (defaults to 0)

  /// Uniform grid helper: same N and L on every axis.
  static GridSpec uniform(int n, int m, int cells, double period);

  double h(int axis) const { return period[axis] / cells[axis]; }
  double h_min() const;
  std::size_t node_count() const;
  int stride(int axis) const;
  int index_along(std::size_t node, int axis) const;
  /// Node coordinate along `axis`.
  double coord(std::size_t node, int axis) const;
  /// Coordinate of the domain center along `axis`.
  double center(int axis) const;
  /// Neighbor of `node` shifted by `offset` cells along `axis`; `wraps`
  /// receives the signed number of seam crossings.
  std::size_t neighbor(std::size_t node, int axis, int offset, int* wraps) const;

  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

/// Dirichlet data for the first and last node along axis 0. Used for windows
/// of non-periodic solutions (the grim reaper), everything else is periodic.
struct BoundaryClamp {
  std::function<Vector(const Vector& x, double t)> value;
};

struct GraphState {
  GridSpec spec;
  double t = 0.0;
  std::vector<double> f;  ///< node-major, m values per node
  Matrix tilt;            ///< n x m linear part
  std::shared_ptr<const BoundaryClamp> clamp;

  double value(std::size_t node, int alpha) const {
    return f[node * spec.m + alpha];
  }
  /// f^alpha at `node` shifted by `offset` along `axis`, tilt-corrected.
  double shifted(std::size_t node, int alpha, int axis, int offset) const;
  /// Shift along two axes at once (for mixed derivatives).
  double shifted2(std::size_t node, int alpha, int axis1, int off1, int axis2,
                  int off2) const;
};

/// Second-order central-difference jet of f at one node.
struct NodeJet {
  Matrix df;  ///< n x m, df(i, alpha) = d_i f^alpha
  Matrix d2f; ///< (n*n) x m, row i*n+j holds d_i d_j f
};

NodeJet jet_at(const GraphState& s, std::size_t node);

/// Per-node geometry, stored structure-of-arrays. Matrices are column-major
/// blocks; B holds the (n+m)-dim ambient vector B_ij in column i*n+j.
class GeometrySnapshot {
 public:
  GeometrySnapshot() = default;
  GeometrySnapshot(int n, int m, std::size_t nodes);

  int n() const { return n_; }
  int m() const { return m_; }
  int ambient() const { return n_ + m_; }
  std::size_t nodes() const { return nodes_; }

  Eigen::Map<const Matrix> g(std::size_t k) const;
  Eigen::Map<const Matrix> inv_g(std::size_t k) const;
  Eigen::Map<const Matrix> B(std::size_t k) const;
  Eigen::Map<const Vector> H(std::size_t k) const;
  Eigen::Map<const Matrix> gauss_z(std::size_t k) const;

  Eigen::Map<Matrix> g(std::size_t k);
  Eigen::Map<Matrix> inv_g(std::size_t k);
  Eigen::Map<Matrix> B(std::size_t k);
  Eigen::Map<Vector> H(std::size_t k);
  Eigen::Map<Matrix> gauss_z(std::size_t k);

  std::vector<double> sqrt_det_g;  ///< Delta_f
  std::vector<double> b2;          ///< |B|^2
  std::vector<double> v_tilde;     ///< v of the Gauss map
  std::vector<double> rho;         ///< distance of the Gauss image from P0
  std::vector<double> h_v32;       ///< NaN where v >= 2
  std::vector<double> h_sec;       ///< NaN outside the geodesic ball

 private:
  int n_ = 0;
  int m_ = 0;
  std::size_t nodes_ = 0;
  std::vector<double> g_, inv_g_, b_, h_, z_;
};

/// Any failure while flowing. Carries the last state that was finite, when
/// there is one.
class FlowError : public std::runtime_error {
 public:
  explicit FlowError(const std::string& what,
                     std::optional<GraphState> last_valid = std::nullopt,
                     long node = -1)
      : std::runtime_error(what), last_valid_(std::move(last_valid)), node_(node) {}
  const std::optional<GraphState>& last_valid() const { return last_valid_; }
  long node() const { return node_; }

 private:
  std::optional<GraphState> last_valid_;
  long node_;
};

class CflViolation : public FlowError {
 public:
  using FlowError::FlowError;
};

GeometrySnapshot geometry_of(const GraphState& s);

/// g^{ij} d_i d_j f at every node, node-major like GraphState::f.
std::vector<double> mcf_velocity(const GraphState& s);

/// safety * min_node h_min^2 / (2 * sum_i g^{ii}).
double cfl_dt(const GraphState& s, double safety = 0.5);

/// One Heun (SSP-RK2) step. Throws CflViolation when dt exceeds cfl_dt and
/// FlowError (with the input as last valid state) on non-finite output.
GraphState step(const GraphState& s, double dt, double cfl_safety = 0.5);

/// Conservative second-order Laplace-Beltrami of a scalar grid field.
std::vector<double> laplace_beltrami(const GraphState& s,
                                     const std::vector<double>& u);

/// The discrete Dirichlet form matched to laplace_beltrami:
///   sum_nodes (Delta u) w sqrt(det g) prod h = -dirichlet_form(u, w)
/// exactly (up to roundoff) on periodic fields.
double dirichlet_form(const GraphState& s, const std::vector<double>& u,
                      const std::vector<double>& w);

/// Central-difference gradient of a periodic scalar field at one node.
Vector field_gradient(const GraphState& s, const std::vector<double>& u,
                      std::size_t node);

struct Frame {
  GraphState state;
  GeometrySnapshot geometry;
};

struct RunResult {
  std::vector<Frame> frames;
  std::optional<std::string> error;
  long steps = 0;
  double max_dt = 0.0;
};

/// Adaptive dt = cfl_dt each step, truncated to land on snapshot times
/// t0, t0 + every, ..., t_end (t_end always included). On error returns the
/// frames computed so far plus the message.
RunResult run(const GraphState& s0, double t_end, double snapshot_every,
              double cfl_safety = 0.5);

// --- presets -----------------------------------------------------------------

using Params = std::map<std::string, double>;

struct PresetInfo {
  std::string name;
  Params defaults;
  std::string description;
  std::string exercises;
};

const std::vector<PresetInfo>& preset_catalog();

/// Whether `name` is a known preset and accepts parameter `key` on an n x m
/// grid (affine slopes and offsets depend on the shape).
bool preset_exists(const std::string& name);
bool preset_accepts(const std::string& name, const std::string& key, int n, int m);

/// Deterministic initial data. Every preset also accepts
///   target_sup_delta_f  rescale so that sup Delta_f equals this value,
///   target_max_rho      rescale so that the largest Gauss-image distance
///                       from P0 equals this value,
///   require_delta_below_two  (0/1) reject data with sup Delta_f >= 2.
/// "grim_reaper" overrides spec.origin and spec.period to fit its window.
GraphState init_preset(const std::string& name, const Params& params,
                       const GridSpec& spec);

double sup_delta_f(const GraphState& s);
double max_gauss_rho(const GraphState& s);

}  // namespace grassflow::mcf
