#pragma once

#include "arrivallab/convex_geometry.hpp"
#include "arrivallab/speed_functions.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace arrivallab {

/// One time level of a contracting curve flow with its intrinsic quantities.
///
/// dtF is the normal-motion derivative of F, assembled from the evolution
/// identity dtF = F'(kappa) (F_ss + kappa^2 F) rather than by differencing in
/// time. At fixed theta the time derivative of F differs from it by the
/// tangential drift: d/dt F|_theta = dtF - F_s^2 / kappa.
struct FlowSnapshot {
  double t = 0.0;
  SupportCurve curve;
  std::vector<double> kappa;
  std::vector<double> F;
  std::vector<double> F_s;
  std::vector<double> F_ss;
  std::vector<double> dtF;
};

FlowSnapshot make_snapshot(const SupportCurve& curve, double t, const SpeedSpec& speed);

struct FlowOptions {
  /// Fraction of the explicit RK4 stability limit used per step.
  double dt_safety = 0.5;
  /// Stop once inradius < extinction_fraction * initial inradius.
  double extinction_fraction = 1e-3;
  /// A snapshot is stored whenever t - t_last >= cadence * inradius / max F,
  /// i.e. roughly every `cadence` relative shrink of the curve.
  double snapshot_cadence = 0.005;
  std::size_t max_steps = 20'000'000;
  int max_halvings = 30;
};

enum class FlowStatus { completed, convexity_lost, step_limit };
std::string_view to_string(FlowStatus status);

struct FlowTrajectory {
  std::vector<FlowSnapshot> snapshots;
  double t0 = 0.0;
  double T_ext = 0.0;
  Vec2 p_ext = Vec2::Zero();
  SpeedSpec speed;
  FlowOptions opts;
  FlowStatus status = FlowStatus::completed;
  std::string diagnostic;
  std::size_t steps = 0;
  double initial_inradius = 0.0;
};

/// Explicit RK4 stability limit 2.785 / max_j (F'(kappa_j) kappa_j^2 (R - 1)),
/// R the spectral radius of the discrete d^2/dtheta^2.
double stable_time_step(const SupportCurve& curve, const SpeedSpec& speed);

/// Advances dh/dt = -F by `dt` with RK4 substeps no larger than
/// opts.dt_safety * stable_time_step. A substep that breaks convexity is
/// rejected and halved; ConvexityLost after opts.max_halvings halvings,
/// StabilityViolation if more than opts.max_steps substeps would be needed.
FlowSnapshot step(const FlowSnapshot& snapshot, double dt, const SpeedSpec& speed,
                  const FlowOptions& opts = {});

/// Integrates until the inradius drops below the extinction threshold.
/// The speed must have dimension 1 and be strictly increasing.
FlowTrajectory run(const SupportCurve& initial, const SpeedSpec& speed, double t0,
                   const FlowOptions& opts = {});

/// Extinction time by extrapolating inradius^{1+alpha} to zero from the last
/// three snapshots (exact for homothetically shrinking curves).
double extrapolate_extinction_time(const FlowTrajectory& traj);

}  // namespace arrivallab
