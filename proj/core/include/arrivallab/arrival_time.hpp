#pragma once

#include "arrivallab/flow_solver.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace arrivallab {

using Mat2 = Eigen::Matrix2d;

/// Below this |Du| level-set quantities throw DegenerateGradient.
inline constexpr double kGradientFloor = 1e-10;

/// Uniform node grid: node (i, j) sits at (x0 + i dx, y0 + j dx).
struct Grid {
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;

  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  Vec2 point(std::size_t i, std::size_t j) const {
    return {x0 + static_cast<double>(i) * dx, y0 + static_cast<double>(j) * dx};
  }
};

/// Point evaluation of u between nodes: bilinear on the cell, or tensor cubic
/// Lagrange on the surrounding 4 x 4 nodes.
enum class Interpolation { bilinear, cubic };
std::string_view to_string(Interpolation interp);
Interpolation parse_interpolation(std::string_view name);

struct GridSpec {
  /// Spacing; ignored when nx > 0 (then dx = box width / (nx - 1 - 2 margin)).
  double dx = 1.0 / 128.0;
  std::size_t nx = 0;
  /// Extra exterior nodes on each side of the bounding box.
  std::size_t margin = 3;
  /// Exclusion radius around the extinction point; <= 0 selects
  /// max(5 dx, 0.1 * initial inradius).
  double r_excl = 0.0;
  /// Finite-difference order for Du and D^2u, 2 or 4.
  int stencil_order = 4;
  Interpolation interpolation = Interpolation::cubic;
};

/// Grid covering the bounding box of `curve` with spec.margin spare nodes.
Grid make_grid(const SupportCurve& curve, const GridSpec& spec);

enum class CellMask : std::uint8_t { interior, boundary_layer, extinction_ball, exterior };
std::string_view to_string(CellMask mask);

struct Derivatives {
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();
};

/// Arrival time sampled on a grid. u = t0 on and outside the initial
/// boundary; cells near the extinction point carry u = T_ext.
struct ArrivalField {
  Grid grid;
  std::vector<double> u;
  std::vector<CellMask> mask;
  double t0 = 0.0;
  double T_ext = 0.0;
  Vec2 p_ext = Vec2::Zero();
  double alpha = 1.0;
  double r_excl = 0.0;
  int stencil_order = 4;
  Interpolation interpolation = Interpolation::cubic;

  CellMask mask_at(std::size_t i, std::size_t j) const { return mask[grid.index(i, j)]; }
  double u_at(std::size_t i, std::size_t j) const { return u[grid.index(i, j)]; }

  /// Cell (i, j) and its whole FD stencil avoid exterior and extinction cells.
  bool stencil_valid(std::size_t i, std::size_t j) const;
  /// The cell itself is interior and its stencil is valid.
  bool hessian_valid(std::size_t i, std::size_t j) const;

  /// Lower-left node of the cell containing x, if x lies inside the grid.
  std::optional<std::pair<std::size_t, std::size_t>> locate(const Vec2& x) const;
  /// Every node of the interpolation footprint around x is interior.
  bool interpolable(const Vec2& x) const;
  /// Interpolated u; MaskedPoint unless interpolable(x).
  double value_at(const Vec2& x) const;

  /// FD Du, D^2u at a node; MaskedPoint unless stencil_valid.
  Derivatives derivatives(std::size_t i, std::size_t j) const;
  /// FD derivatives at the four corners, blended bilinearly to x.
  /// MaskedPoint unless all four corner stencils are valid.
  Derivatives derivatives_at(const Vec2& x) const;
};

/// Field built from a closed-form u (for tests and negative controls).
/// boundary_distance is positive inside the domain: nodes with a negative value
/// are exterior, nodes within r_excl of p_ext form the extinction ball and
/// nodes with boundary_distance <= 2 dx are boundary_layer.
ArrivalField synthetic_field(const Grid& grid, const std::function<double(const Vec2&)>& u,
                             const std::function<double(const Vec2&)>& boundary_distance, double t0,
                             double T_ext, Vec2 p_ext, double alpha, double r_excl, int stencil_order = 4);

/// Inverts the trajectory: u(x) is the time at which the moving boundary
/// passes x. Between snapshots h is interpolated by quintic Hermite in time
/// (using dh/dt = -F and its time derivative at fixed theta) and the support
/// gap max_theta[x . nu - h] is driven to zero by safeguarded Newton in t.
ArrivalField reconstruct(const FlowTrajectory& traj, const GridSpec& spec);

/// FD derivatives of an arbitrary grid array (same stencils as ArrivalField).
Derivatives grid_derivatives(const Grid& grid, std::span<const double> values, std::size_t i, std::size_t j,
                             int order);

enum class TransformKind { sqrt_power, log, raw };
std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

/// phi, phi', phi'' of the transform at level u.
struct TransformValue {
  double value, d1, d2;
};
TransformValue apply_transform(TransformKind kind, double u, double t0, double alpha);

/// phi(u) on the grid: sqrt_power is ((1+alpha)(u-t0))^{1/(1+alpha)}, log is
/// log(u-t0) (-inf on the boundary), raw is u. Masked cells hold NaN.
struct TransformedField {
  TransformKind kind = TransformKind::sqrt_power;
  std::vector<double> values;
  std::shared_ptr<const ArrivalField> source;

  double transform(double u) const { return apply_transform(kind, u, source->t0, source->alpha).value; }
  /// phi applied to the interpolated u (MaskedPoint unless interpolable).
  double value_at(const Vec2& x) const { return transform(source->value_at(x)); }
  /// Dw, D^2w by the chain rule from the FD derivatives of u.
  Derivatives derivatives(std::size_t i, std::size_t j) const;
  /// Dw, D^2w by finite differences directly on `values`.
  Derivatives direct_derivatives(std::size_t i, std::size_t j) const;
};

TransformedField make_transformed(std::shared_ptr<const ArrivalField> field, TransformKind kind);

/// -(1 / |Dw|) t^T D^2w t with t the unit tangent to the level set (n = 1:
/// the tangential block is a scalar). Equals the curvature of the level set.
double level_set_curvature(const Derivatives& d);
double level_set_curvature(const ArrivalField& field, std::size_t i, std::size_t j);
double level_set_curvature(const TransformedField& field, std::size_t i, std::size_t j);

/// |Du| f(A)^alpha - 1 at node (i, j).
double level_set_residual(const ArrivalField& field, const SpeedSpec& speed, std::size_t i, std::size_t j);

struct ResidualReport {
  double max_value = 0.0;
  double mean_value = 0.0;
  std::size_t count = 0;
  Vec2 witness = Vec2::Zero();
};

/// |level_set_residual| over every hessian_valid cell.
ResidualReport level_set_residual_sweep(const ArrivalField& field, const SpeedSpec& speed);

/// Relative error |Du_num + nu / F| / |nu / F| at `samples` boundary points of
/// snapshots clear of the extinction ball. Du_num is bilinear-blended FD where
/// stencils allow, otherwise a local least-squares quadratic fit.
/// With include_initial the t0 snapshot is sampled as well.
ResidualReport gradient_identity_residual(const ArrivalField& field, const FlowTrajectory& traj,
                                          std::size_t samples, bool include_initial = false);

/// Du at x by a least-squares quadratic fit to non-exterior, non-extinction
/// nodes within 2.5 dx. MaskedPoint if fewer than eight nodes qualify.
Vec2 fitted_gradient(const ArrivalField& field, const Vec2& x);

/// (snapshot, node) pairs spread over snapshots whose boundary stays at least
/// `clearance` away from p_ext; deterministic.
std::vector<std::pair<std::size_t, std::size_t>> boundary_samples(const FlowTrajectory& traj, const Vec2& p_ext,
                                                                  double clearance, std::size_t samples,
                                                                  bool include_initial);

}  // namespace arrivallab
