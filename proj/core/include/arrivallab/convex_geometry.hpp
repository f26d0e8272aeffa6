#pragma once

#include "arrivallab/periodic.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace arrivallab {

/// Radius of curvature h'' + h at or below this value means convexity is lost.
inline constexpr double kRadiusFloor = 1e-12;

/// Points whose support residual lies in [-kBoundaryTieBreak, 0] count as outside.
inline constexpr double kBoundaryTieBreak = 1e-12;

using Vec2 = Eigen::Vector2d;

inline Vec2 unit_normal(double theta) { return {std::cos(theta), std::sin(theta)}; }
inline Vec2 unit_tangent(double theta) { return {-std::sin(theta), std::cos(theta)}; }

/// A strictly convex plane curve given by its support function h sampled on
/// theta_j = 2*pi*j/N, measured from `origin`.
///
/// Immutable once built: the constructor computes h', the radius of curvature
/// rho = h'' + h and the trigonometric interpolant of h, and throws
/// ConvexityLost if rho <= kRadiusFloor anywhere.
class SupportCurve {
 public:
  SupportCurve(std::vector<double> h, Vec2 origin = Vec2::Zero(), DiffScheme scheme = DiffScheme::spectral);

  static SupportCurve circle(std::size_t n, double radius, Vec2 center = Vec2::Zero(),
                             DiffScheme scheme = DiffScheme::spectral);
  /// Ellipse with semi-axes (a, b), major axis rotated by `rotation`.
  static SupportCurve ellipse(std::size_t n, double a, double b, Vec2 center = Vec2::Zero(),
                              double rotation = 0.0, DiffScheme scheme = DiffScheme::spectral);
  /// h = a0 + sum_k cos_coeffs[k-1] cos(k theta) + sin_coeffs[k-1] sin(k theta).
  /// The radius of curvature is checked on a 16x oversampled grid first.
  static SupportCurve fourier(std::size_t n, double a0, std::span<const double> cos_coeffs,
                              std::span<const double> sin_coeffs, DiffScheme scheme = DiffScheme::spectral);
  static SupportCurve from_function(std::size_t n, const std::function<double(double)>& h,
                                    Vec2 origin = Vec2::Zero(), DiffScheme scheme = DiffScheme::spectral);

  std::size_t theta_count() const { return h_.size(); }
  double theta(std::size_t j) const;
  double dtheta() const;

  const std::vector<double>& h() const { return h_; }
  const std::vector<double>& h_theta() const { return h_theta_; }
  /// Radius of curvature rho_j = h''(theta_j) + h(theta_j).
  const std::vector<double>& radius_of_curvature() const { return rho_; }
  const Vec2& origin() const { return origin_; }
  DiffScheme scheme() const { return scheme_; }
  const PeriodicDifferentiator& differentiator() const { return diff_; }
  const TrigInterpolant& interpolant() const { return interp_; }

  /// Same body, support function re-measured from origin + shift.
  SupportCurve translated_origin(const Vec2& shift) const;
  /// Dilation about the origin.
  SupportCurve scaled(double factor) const;
  /// Same body with h replaced; origin and scheme kept.
  SupportCurve with_h(std::vector<double> h) const;

 private:
  std::vector<double> h_;
  std::vector<double> h_theta_;
  std::vector<double> rho_;
  Vec2 origin_;
  DiffScheme scheme_;
  PeriodicDifferentiator diff_;
  TrigInterpolant interp_;
};

struct BoundaryPoint {
  Vec2 position;
  Vec2 normal;
  double curvature = 0.0;
  double theta = 0.0;
};

/// kappa_j = 1 / (h'' + h).
double curvature(const SupportCurve& curve, std::size_t j);
std::vector<double> curvatures(const SupportCurve& curve);

/// position = origin + h nu + h' tau, nu the outward normal at theta_j.
BoundaryPoint boundary_point(const SupportCurve& curve, std::size_t j);

/// (field_s, field_ss) using ds = rho dtheta and the curve's scheme.
std::pair<std::vector<double>, std::vector<double>> arclength_derivatives(const SupportCurve& curve,
                                                                          std::span<const double> field);

/// max_j [(x - origin) . nu_j - h_j] < -kBoundaryTieBreak.
bool contains(const SupportCurve& curve, const Vec2& x);

/// Continuous support residual g(x) = max_theta [(x - origin) . nu(theta) - h(theta)]
/// on the trigonometric interpolant: -dist(x, boundary) inside, > 0 outside.
struct SupportGap {
  double gap = 0.0;
  double theta = 0.0;  ///< maximizing normal angle
};
SupportGap support_gap(const SupportCurve& curve, const Vec2& x);

/// Node-wise maximum of the support residual and its argmax index.
std::pair<double, std::size_t> node_support_residual(const SupportCurve& curve, const Vec2& x);

/// Newton refinement of max_theta [p . nu(theta) - H(theta)] from an initial angle.
/// `h_at` returns H, H', H'' at theta.
SupportGap maximize_support_residual(const Vec2& p, double theta0, double dtheta,
                                     const std::function<TrigInterpolant::Value(double)>& h_at);

/// Enclosed area (1/2) \oint (h^2 - h'^2) dtheta.
double area(const SupportCurve& curve);
/// Steiner point origin + (1/pi) \oint h nu dtheta; always interior.
Vec2 steiner_point(const SupportCurve& curve);
/// min_j [h_j - (s - origin) . nu_j] with s the Steiner point.
double inradius(const SupportCurve& curve);
/// Axis-aligned box [xmin, xmax] x [ymin, ymax] from h(0), h(pi/2), h(pi), h(3pi/2).
std::pair<Vec2, Vec2> bounding_box(const SupportCurve& curve);
/// max/min of the width h(theta) + h(theta + pi) over nodes; 1 for a circle.
double width_ratio(const SupportCurve& curve);

}  // namespace arrivallab
