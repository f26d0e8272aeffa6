#pragma once

#include "arrivallab/arrival_time.hpp"
#include "arrivallab/flow_solver.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string_view>
#include <vector>

namespace arrivallab {

enum class HarnackMode { with_time_term, ancient };
std::string_view to_string(HarnackMode mode);
HarnackMode parse_harnack_mode(std::string_view name);

/// Closed-form minimum over tangent directions of the Harnack quadratic
/// q(v) = dtF + 2 v F_s + kappa v^2 + [alpha F / ((1+alpha)(t - t0))]:
/// Q_j = dtF_j - F_s,j^2 / kappa_j + [time term], attained at v = -F_s / kappa.
/// with_time_term requires t > t0.
std::vector<double> harnack_min(const FlowSnapshot& snapshot, double t0, double alpha, HarnackMode mode);

struct CrossCheckReport {
  std::size_t samples = 0;
  std::size_t skipped = 0;
  double max_rel_discrepancy = 0.0;
  double mean_rel_discrepancy = 0.0;
  /// Witness (t, theta) of the largest discrepancy.
  double witness_t = 0.0;
  double witness_theta = 0.0;
  /// Largest eigenvalue over samples, intrinsic and finite-difference.
  double worst_intrinsic_eigenvalue = 0.0;
  double worst_extrinsic_eigenvalue = 0.0;
  /// Samples on which the two largest eigenvalues have the same sign.
  std::size_t sign_agreements = 0;
};
void to_json(nlohmann::json& j, const CrossCheckReport& report);

struct HarnackSnapshotMin {
  double t = 0.0;
  double q_min = 0.0;
  double theta = 0.0;
};

struct HarnackReport {
  std::vector<HarnackSnapshotMin> per_snapshot;
  double q_min = 0.0;
  double witness_t = 0.0;
  double witness_theta = 0.0;
  double alpha = 1.0;
  double t0 = 0.0;
  HarnackMode mode = HarnackMode::with_time_term;
  std::size_t skipped = 0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::pass;
  std::optional<CrossCheckReport> cross_check;
};
void to_json(nlohmann::json& j, const HarnackReport& report);

/// Minima of Q over every snapshot. In with_time_term mode snapshots within
/// 1e-3 (T_ext - traj.t0) of traj.t0 are skipped. t0 defaults to traj.t0.
HarnackReport harnack_report(const FlowTrajectory& traj, HarnackMode mode, double tol,
                             std::optional<double> t0 = std::nullopt);

/// w^{-alpha} [[-kappa/F, F_s/F^2], [F_s/F^2, -(dtF + alpha F / w^{1+alpha}) / F^3]]
/// in the (tangent, normal) frame, w = ((1+alpha)(t - t0))^{1/(1+alpha)}.
Mat2 intrinsic_hessian_w(const FlowSnapshot& snapshot, std::size_t j, double t0, double alpha);

/// R M R^T with R = [tangent normal] at theta.
Mat2 frame_to_cartesian(const Mat2& m, double theta);

/// w^{-alpha} (D^2u - alpha Du (x) Du / w^{1+alpha}) at x with Du, D^2u
/// bilinearly blended from the four surrounding FD nodes and w from the
/// interpolated u. MaskedPoint when a stencil or corner is excluded.
Mat2 extrinsic_hessian_w(const ArrivalField& field, const Vec2& x);

/// Compares the two Hessians of w at boundary points of snapshots clear of
/// the extinction ball (relative Frobenius discrepancy). Masked samples are
/// counted in `skipped`.
CrossCheckReport equivalence_check(const FlowTrajectory& traj, const ArrivalField& field, std::size_t samples);

struct MonotonicityEntry {
  double t0 = 0.0;
  double q_min = 0.0;
};

struct MonotonicityReport {
  /// Sorted by decreasing t0.
  std::vector<MonotonicityEntry> entries;
  bool nonincreasing = true;
  bool strictly_decreasing = true;
};
void to_json(nlohmann::json& j, const MonotonicityReport& report);

/// min Q over the same snapshot set for each t0; Q should not grow as t0 drops.
/// Every t0 must be below the first snapshot used.
MonotonicityReport time_term_monotonicity(const FlowTrajectory& traj, const std::vector<double>& t0_list);

}  // namespace arrivallab
