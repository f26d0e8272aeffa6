#include "arrivallab/convex_geometry.hpp"

#include "arrivallab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace arrivallab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void validate_size(std::size_t n) {
  if (!is_power_of_two(n) || n < 64 || n > 2048) {
    throw std::invalid_argument("theta_count must be a power of two in [64, 2048], got " + std::to_string(n));
  }
}

}  // namespace

SupportCurve::SupportCurve(std::vector<double> h, Vec2 origin, DiffScheme scheme)
    : h_(std::move(h)),
      origin_(std::move(origin)),
      scheme_(scheme),
      diff_((validate_size(h_.size()), h_.size()), scheme) {
  h_theta_.resize(h_.size());
  rho_.resize(h_.size());
  diff_.derivatives(h_, h_theta_, rho_);
  for (std::size_t j = 0; j < h_.size(); ++j) {
    rho_[j] += h_[j];
    if (!(rho_[j] > kRadiusFloor)) {
      std::ostringstream msg;
      msg << "radius of curvature " << rho_[j] << " at node " << j << " is below the convexity floor";
      throw ConvexityLost(msg.str());
    }
  }
  interp_ = TrigInterpolant(h_);
}

SupportCurve SupportCurve::from_function(std::size_t n, const std::function<double(double)>& h, Vec2 origin,
                                         DiffScheme scheme) {
  validate_size(n);
  std::vector<double> samples(n);
  for (std::size_t j = 0; j < n; ++j) samples[j] = h(kTwoPi * static_cast<double>(j) / static_cast<double>(n));
  return SupportCurve(std::move(samples), std::move(origin), scheme);
}

SupportCurve SupportCurve::circle(std::size_t n, double radius, Vec2 center, DiffScheme scheme) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
  return from_function(
      n, [&](double t) { return radius + center.dot(unit_normal(t)); }, Vec2::Zero(), scheme);
}

SupportCurve SupportCurve::ellipse(std::size_t n, double a, double b, Vec2 center, double rotation,
                                   DiffScheme scheme) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("ellipse semi-axes must be positive");
  return from_function(
      n,
      [&](double t) {
        const double c = std::cos(t - rotation), s = std::sin(t - rotation);
        return std::sqrt(a * a * c * c + b * b * s * s) + center.dot(unit_normal(t));
      },
      Vec2::Zero(), scheme);
}

SupportCurve SupportCurve::fourier(std::size_t n, double a0, std::span<const double> cos_coeffs,
                                   std::span<const double> sin_coeffs, DiffScheme scheme) {
  auto radius = [&](double t) {
    double rho = a0;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      rho += (1.0 - kk * kk) * cos_coeffs[k] * std::cos(kk * t);
    }
    for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      rho += (1.0 - kk * kk) * sin_coeffs[k] * std::sin(kk * t);
    }
    return rho;
  };
  const std::size_t check = 16 * n;
  for (std::size_t j = 0; j < check; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(check);
    if (!(radius(t) > kRadiusFloor)) {
      throw ConvexityLost("fourier support function is not strictly convex (h'' + h <= 0 near theta = " +
                          std::to_string(t) + ")");
    }
  }
  return from_function(
      n,
      [&](double t) {
        double h = a0;
        for (std::size_t k = 0; k < cos_coeffs.size(); ++k) h += cos_coeffs[k] * std::cos((k + 1.0) * t);
        for (std::size_t k = 0; k < sin_coeffs.size(); ++k) h += sin_coeffs[k] * std::sin((k + 1.0) * t);
        return h;
      },
      Vec2::Zero(), scheme);
}

double SupportCurve::theta(std::size_t j) const {
  return kTwoPi * static_cast<double>(j) / static_cast<double>(h_.size());
}

double SupportCurve::dtheta() const { return kTwoPi / static_cast<double>(h_.size()); }

SupportCurve SupportCurve::translated_origin(const Vec2& shift) const {
  std::vector<double> h = h_;
  for (std::size_t j = 0; j < h.size(); ++j) h[j] -= shift.dot(unit_normal(theta(j)));
  return SupportCurve(std::move(h), origin_ + shift, scheme_);
}

SupportCurve SupportCurve::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
  std::vector<double> h = h_;
  for (double& v : h) v *= factor;
  return SupportCurve(std::move(h), origin_, scheme_);
}

SupportCurve SupportCurve::with_h(std::vector<double> h) const {
  return SupportCurve(std::move(h), origin_, scheme_);
}

double curvature(const SupportCurve& curve, std::size_t j) { return 1.0 / curve.radius_of_curvature().at(j); }

std::vector<double> curvatures(const SupportCurve& curve) {
  std::vector<double> k(curve.theta_count());
  const auto& rho = curve.radius_of_curvature();
  for (std::size_t j = 0; j < k.size(); ++j) k[j] = 1.0 / rho[j];
  return k;
}

BoundaryPoint boundary_point(const SupportCurve& curve, std::size_t j) {
  const double t = curve.theta(j);
  BoundaryPoint p;
  p.theta = t;
  p.normal = unit_normal(t);
  p.position = curve.origin() + curve.h()[j] * p.normal + curve.h_theta()[j] * unit_tangent(t);
  p.curvature = curvature(curve, j);
  return p;
}

std::pair<std::vector<double>, std::vector<double>> arclength_derivatives(const SupportCurve& curve,
                                                                          std::span<const double> field) {
  const std::size_t n = curve.theta_count();
  if (field.size() != n) throw std::invalid_argument("field must be sampled on the curve's theta grid");
  const auto& rho = curve.radius_of_curvature();
  std::vector<double> first = curve.differentiator().first(field);
  for (std::size_t j = 0; j < n; ++j) first[j] /= rho[j];
  std::vector<double> second = curve.differentiator().first(first);
  for (std::size_t j = 0; j < n; ++j) second[j] /= rho[j];
  return {std::move(first), std::move(second)};
}

std::pair<double, std::size_t> node_support_residual(const SupportCurve& curve, const Vec2& x) {
  const Vec2 p = x - curve.origin();
  const auto& h = curve.h();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double r = p.dot(unit_normal(curve.theta(j))) - h[j];
    if (r > best) {
      best = r;
      arg = j;
    }
  }
  return {best, arg};
}

bool contains(const SupportCurve& curve, const Vec2& x) {
  return node_support_residual(curve, x).first < -kBoundaryTieBreak;
}

SupportGap maximize_support_residual(const Vec2& p, double theta0, double dtheta,
                                     const std::function<TrigInterpolant::Value(double)>& h_at) {
  double theta = theta0;
  for (int it = 0; it < 12; ++it) {
    const auto hv = h_at(theta);
    const Vec2 nu = unit_normal(theta);
    const Vec2 tau = unit_tangent(theta);
    const double g1 = p.dot(tau) - hv.df;
    const double g2 = -p.dot(nu) - hv.d2f;
    double step = (g2 < 0.0) ? -g1 / g2 : (g1 > 0.0 ? dtheta : -dtheta);
    step = std::clamp(step, -dtheta, dtheta);
    theta += step;
    if (std::abs(step) < 1e-15) break;
  }
  const auto hv = h_at(theta);
  return {p.dot(unit_normal(theta)) - hv.f, theta};
}

SupportGap support_gap(const SupportCurve& curve, const Vec2& x) {
  const auto [node_gap, j] = node_support_residual(curve, x);
  (void)node_gap;
  const Vec2 p = x - curve.origin();
  const auto& interp = curve.interpolant();
  return maximize_support_residual(p, curve.theta(j), curve.dtheta(),
                                   [&](double t) { return interp.eval(t); });
}

double area(const SupportCurve& curve) {
  const auto& h = curve.h();
  const auto& hp = curve.h_theta();
  double s = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) s += h[j] * h[j] - hp[j] * hp[j];
  return 0.5 * s * curve.dtheta();
}

Vec2 steiner_point(const SupportCurve& curve) {
  Vec2 s = Vec2::Zero();
  const auto& h = curve.h();
  for (std::size_t j = 0; j < h.size(); ++j) s += h[j] * unit_normal(curve.theta(j));
  return curve.origin() + s * (curve.dtheta() / std::numbers::pi);
}

double inradius(const SupportCurve& curve) {
  const Vec2 s = steiner_point(curve) - curve.origin();
  const auto& h = curve.h();
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < h.size(); ++j) r = std::min(r, h[j] - s.dot(unit_normal(curve.theta(j))));
  return r;
}

std::pair<Vec2, Vec2> bounding_box(const SupportCurve& curve) {
  const auto& f = curve.interpolant();
  const double pi = std::numbers::pi;
  const Vec2 lo(curve.origin().x() - f.value(pi), curve.origin().y() - f.value(1.5 * pi));
  const Vec2 hi(curve.origin().x() + f.value(0.0), curve.origin().y() + f.value(0.5 * pi));
  return {lo, hi};
}

double width_ratio(const SupportCurve& curve) {
  const auto& h = curve.h();
  const std::size_t n = h.size();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double w = h[j] + h[j + n / 2];
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  return hi / lo;
}

}  // namespace arrivallab
