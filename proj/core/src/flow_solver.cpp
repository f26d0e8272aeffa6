#include "arrivallab/flow_solver.hpp"

#include "arrivallab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace arrivallab {
namespace {

// RK4 stability interval on the negative real axis.
constexpr double kRk4RealStability = 2.785;

// Raw-array RK4 for dh/dt = -F(1 / (h'' + h)); avoids building a SupportCurve
// per stage.
class Rk4Integrator {
 public:
  Rk4Integrator(std::size_t n, DiffScheme scheme, const SpeedSpec& speed)
      : diff_(n, scheme), speed_(speed), work_(n), kappa_(n), k1_(n), k2_(n), k3_(n), k4_(n), stage_(n),
        cos_(n), sin_(n) {
    for (std::size_t j = 0; j < n; ++j) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      cos_[j] = std::cos(t);
      sin_[j] = std::sin(t);
    }
  }

  /// out = -F(h); false if convexity is lost. Leaves kappa_ filled.
  bool rhs(const std::vector<double>& h, std::vector<double>& out) {
    diff_.derivatives(h, {}, work_);
    for (std::size_t j = 0; j < h.size(); ++j) {
      const double rho = work_[j] + h[j];
      if (!(rho > kRadiusFloor)) return false;
      kappa_[j] = 1.0 / rho;
      out[j] = -curve_speed(speed_, kappa_[j]);
    }
    return true;
  }

  /// Evaluates k1 at h. Must precede attempt().
  bool begin(const std::vector<double>& h) { return rhs(h, k1_); }

  double max_speed() const {
    double m = 0.0;
    for (double v : k1_) m = std::max(m, -v);
    return m;
  }

  /// Stability limit at the state passed to begin().
  double stable_dt() const {
    double stiff = 0.0;
    for (double k : kappa_) stiff = std::max(stiff, curve_speed_derivative(speed_, k) * k * k);
    const double radius = diff_.second_derivative_spectral_radius() - 1.0;
    return kRk4RealStability / (stiff * radius);
  }

  /// Classical RK4 from h with the k1 computed in begin(); result into h_new.
  bool attempt(const std::vector<double>& h, double dt, std::vector<double>& h_new) {
    const std::size_t n = h.size();
    for (std::size_t j = 0; j < n; ++j) stage_[j] = h[j] + 0.5 * dt * k1_[j];
    if (!rhs(stage_, k2_)) return false;
    for (std::size_t j = 0; j < n; ++j) stage_[j] = h[j] + 0.5 * dt * k2_[j];
    if (!rhs(stage_, k3_)) return false;
    for (std::size_t j = 0; j < n; ++j) stage_[j] = h[j] + dt * k3_[j];
    if (!rhs(stage_, k4_)) return false;
    h_new.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      h_new[j] = h[j] + dt / 6.0 * (k1_[j] + 2.0 * k2_[j] + 2.0 * k3_[j] + k4_[j]);
    }
    // The accepted state itself must be convex too.
    diff_.derivatives(h_new, {}, work_);
    for (std::size_t j = 0; j < n; ++j) {
      if (!(work_[j] + h_new[j] > kRadiusFloor)) return false;
    }
    return true;
  }

  /// Inradius about the Steiner point, matching inradius(SupportCurve).
  double inradius(const std::vector<double>& h) const {
    const std::size_t n = h.size();
    double sx = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sx += h[j] * cos_[j];
      sy += h[j] * sin_[j];
    }
    const double scale = 2.0 / static_cast<double>(n);  // dtheta / pi
    sx *= scale;
    sy *= scale;
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) r = std::min(r, h[j] - sx * cos_[j] - sy * sin_[j]);
    return r;
  }

 private:
  PeriodicDifferentiator diff_;
  const SpeedSpec& speed_;
  std::vector<double> work_, kappa_, k1_, k2_, k3_, k4_, stage_;
  std::vector<double> cos_, sin_;
};

void require_curve_speed(const SpeedSpec& speed) {
  if (speed.dimension != 1) {
    throw std::invalid_argument("curve flows need a speed of dimension 1, got " + std::to_string(speed.dimension));
  }
  if (!is_strictly_monotone_curve_speed(speed)) {
    throw std::invalid_argument("speed '" + speed.name + "' is not positive and strictly increasing in kappa");
  }
}

}  // namespace

std::string_view to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::completed:
      return "completed";
    case FlowStatus::convexity_lost:
      return "convexity_lost";
    case FlowStatus::step_limit:
      return "step_limit";
  }
  return "unknown";
}

FlowSnapshot make_snapshot(const SupportCurve& curve, double t, const SpeedSpec& speed) {
  FlowSnapshot s{t, curve, curvatures(curve), {}, {}, {}, {}};
  const std::size_t n = curve.theta_count();
  s.F.resize(n);
  for (std::size_t j = 0; j < n; ++j) s.F[j] = curve_speed(speed, s.kappa[j]);
  auto [fs, fss] = arclength_derivatives(curve, s.F);
  s.F_s = std::move(fs);
  s.F_ss = std::move(fss);
  s.dtF.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = s.kappa[j];
    s.dtF[j] = curve_speed_derivative(speed, k) * (s.F_ss[j] + k * k * s.F[j]);
  }
  return s;
}

double stable_time_step(const SupportCurve& curve, const SpeedSpec& speed) {
  Rk4Integrator rk(curve.theta_count(), curve.scheme(), speed);
  if (!rk.begin(curve.h())) throw ConvexityLost("curve is not strictly convex");
  return rk.stable_dt();
}

FlowSnapshot step(const FlowSnapshot& snapshot, double dt, const SpeedSpec& speed, const FlowOptions& opts) {
  if (dt < 0.0) throw std::invalid_argument("step: dt must be non-negative");
  if (dt == 0.0) return snapshot;

  const SupportCurve& curve = snapshot.curve;
  Rk4Integrator rk(curve.theta_count(), curve.scheme(), speed);
  std::vector<double> h = curve.h(), h_new;
  double t = snapshot.t;
  const double t_end = snapshot.t + dt;
  std::size_t substeps = 0;

  while (t < t_end) {
    if (!rk.begin(h)) throw ConvexityLost("step: convexity lost at t = " + std::to_string(t));
    const double limit = opts.dt_safety * rk.stable_dt();
    if (!(limit > 0.0) || !std::isfinite(limit)) {
      throw StabilityViolation("step: no admissible time step at t = " + std::to_string(t));
    }
    if (++substeps > opts.max_steps) {
      throw StabilityViolation("step: dt = " + std::to_string(dt) + " needs more than max_steps substeps");
    }
    double sub = std::min(limit, t_end - t);
    const bool last = sub == t_end - t;
    int halvings = 0;
    while (!rk.attempt(h, sub, h_new)) {
      if (++halvings > opts.max_halvings) {
        throw ConvexityLost("step: convexity lost after " + std::to_string(opts.max_halvings) + " halvings");
      }
      sub *= 0.5;
    }
    h.swap(h_new);
    t = (last && halvings == 0) ? t_end : t + sub;
  }
  return make_snapshot(curve.with_h(std::move(h)), t_end, speed);
}

FlowTrajectory run(const SupportCurve& initial, const SpeedSpec& speed, double t0, const FlowOptions& opts) {
  require_curve_speed(speed);

  FlowTrajectory traj;
  traj.t0 = t0;
  traj.speed = speed;
  traj.opts = opts;
  traj.snapshots.push_back(make_snapshot(initial, t0, speed));
  traj.initial_inradius = inradius(initial);
  const double threshold = opts.extinction_fraction * traj.initial_inradius;

  Rk4Integrator rk(initial.theta_count(), initial.scheme(), speed);
  std::vector<double> h = initial.h(), h_new;
  double t = t0;
  double t_last = t0;

  auto push = [&](double time) {
    traj.snapshots.push_back(make_snapshot(initial.with_h(h), time, speed));
    t_last = time;
  };

  while (true) {
    if (!rk.begin(h)) {
      traj.status = FlowStatus::convexity_lost;
      traj.diagnostic = "convexity lost at t = " + std::to_string(t);
      break;
    }
    const double r_in = rk.inradius(h);
    if (r_in < threshold) {
      if (t > t_last) push(t);
      break;
    }
    if (t > t_last && t - t_last >= opts.snapshot_cadence * r_in / rk.max_speed()) push(t);
    if (traj.steps >= opts.max_steps) {
      traj.status = FlowStatus::step_limit;
      traj.diagnostic = "step limit reached at t = " + std::to_string(t);
      if (t > t_last) push(t);
      break;
    }

    double dt = opts.dt_safety * rk.stable_dt();
    int halvings = 0;
    bool ok = true;
    while (!rk.attempt(h, dt, h_new)) {
      if (++halvings > opts.max_halvings) {
        ok = false;
        break;
      }
      dt *= 0.5;
    }
    if (!ok) {
      traj.status = FlowStatus::convexity_lost;
      traj.diagnostic = "convexity lost after step halving at t = " + std::to_string(t);
      break;
    }
    h.swap(h_new);
    t += dt;
    ++traj.steps;
  }

  traj.T_ext = extrapolate_extinction_time(traj);
  traj.p_ext = steiner_point(traj.snapshots.back().curve);
  return traj;
}

double extrapolate_extinction_time(const FlowTrajectory& traj) {
  const auto& s = traj.snapshots;
  if (s.empty()) return traj.t0;
  const double e = 1.0 + traj.speed.alpha;
  auto q = [&](std::size_t i) { return std::pow(std::max(inradius(s[i].curve), 0.0), e); };
  const std::size_t m = s.size();
  if (m == 1) return s[0].t;

  const double t1 = s[m - 2].t, t2 = s[m - 1].t;
  const double q1 = q(m - 2), q2 = q(m - 1);
  const double linear = (q1 != q2) ? t2 + q2 * (t2 - t1) / (q1 - q2) : t2;
  if (m < 3) return linear;

  // Quadratic through the last three points; take the root just past t2.
  const double t0 = s[m - 3].t, q0 = q(m - 3);
  const double d01 = (q1 - q0) / (t1 - t0), d12 = (q2 - q1) / (t2 - t1);
  const double c2 = (d12 - d01) / (t2 - t0);
  const double c1 = d12 + c2 * (t2 - t1);  // derivative of the interpolant at t2
  if (std::abs(c2) < 1e-300) return linear;
  // q(t2 + x) = q2 + c1 x + c2 x^2 = 0
  const double disc = c1 * c1 - 4.0 * c2 * q2;
  if (disc < 0.0) return linear;
  const double sq = std::sqrt(disc);
  // Numerically stable smaller-magnitude root.
  const double x = (c1 < 0.0) ? (2.0 * q2) / (-c1 + sq) : (2.0 * q2) / (-c1 - sq);
  if (!(x >= 0.0) || !std::isfinite(x)) return linear;
  return t2 + x;
}

}  // namespace arrivallab
