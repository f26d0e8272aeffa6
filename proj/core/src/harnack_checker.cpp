#include "arrivallab/harnack_checker.hpp"

#include "arrivallab/concavity_verifier.hpp"
#include "arrivallab/errors.hpp"
#include "arrivallab/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace arrivallab {
namespace {

constexpr double kSkipFraction = 1e-3;

double skip_window(const FlowTrajectory& traj) { return kSkipFraction * (traj.T_ext - traj.t0); }

struct NodeMin {
  double value;
  std::size_t node;
};

NodeMin min_over_nodes(const std::vector<double>& q) {
  const auto it = std::min_element(q.begin(), q.end());
  return {*it, static_cast<std::size_t>(it - q.begin())};
}

}  // namespace

std::string_view to_string(HarnackMode mode) {
  return mode == HarnackMode::ancient ? "ancient" : "with_time_term";
}

HarnackMode parse_harnack_mode(std::string_view name) {
  if (name == "with_time_term") return HarnackMode::with_time_term;
  if (name == "ancient") return HarnackMode::ancient;
  throw ConfigError("unknown harnack mode '" + std::string(name) + "'");
}

std::vector<double> harnack_min(const FlowSnapshot& s, double t0, double alpha, HarnackMode mode) {
  const bool timed = mode == HarnackMode::with_time_term;
  if (timed && !(s.t > t0)) throw std::invalid_argument("harnack_min: time term needs t > t0");
  const double c = timed ? alpha / ((1.0 + alpha) * (s.t - t0)) : 0.0;
  std::vector<double> q(s.F.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    q[j] = s.dtF[j] - s.F_s[j] * s.F_s[j] / s.kappa[j] + c * s.F[j];
  }
  return q;
}

HarnackReport harnack_report(const FlowTrajectory& traj, HarnackMode mode, double tol, std::optional<double> t0) {
  HarnackReport rep;
  rep.alpha = traj.speed.alpha;
  rep.t0 = t0.value_or(traj.t0);
  rep.mode = mode;
  rep.tolerance = tol;
  const double window = skip_window(traj);

  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const double t = traj.snapshots[k].t;
    if (mode == HarnackMode::with_time_term && (t - traj.t0 < window || !(t > rep.t0))) {
      ++rep.skipped;
      continue;
    }
    used.push_back(k);
  }
  rep.per_snapshot.resize(used.size());
  parallel::for_each_index(used.size(), [&](std::size_t u) {
    const FlowSnapshot& s = traj.snapshots[used[u]];
    const NodeMin m = min_over_nodes(harnack_min(s, rep.t0, rep.alpha, mode));
    rep.per_snapshot[u] = {s.t, m.value, s.curve.theta(m.node)};
  });

  rep.q_min = std::numeric_limits<double>::infinity();
  for (const auto& m : rep.per_snapshot) {
    if (m.q_min < rep.q_min) {
      rep.q_min = m.q_min;
      rep.witness_t = m.t;
      rep.witness_theta = m.theta;
    }
  }
  rep.verdict = (!rep.per_snapshot.empty() && rep.q_min >= -tol) ? Verdict::pass : Verdict::fail;
  return rep;
}

Mat2 intrinsic_hessian_w(const FlowSnapshot& s, std::size_t j, double t0, double alpha) {
  const double w_pow = (1.0 + alpha) * (s.t - t0);  // w^{1+alpha}
  if (!(w_pow > 0.0)) throw std::invalid_argument("intrinsic_hessian_w needs t > t0");
  const double w = std::pow(w_pow, 1.0 / (1.0 + alpha));
  const double F = s.F[j];
  Mat2 m;
  m(0, 0) = -s.kappa[j] / F;
  m(0, 1) = m(1, 0) = s.F_s[j] / (F * F);
  m(1, 1) = -(s.dtF[j] + alpha * F / w_pow) / (F * F * F);
  return std::pow(w, -alpha) * m;
}

Mat2 frame_to_cartesian(const Mat2& m, double theta) {
  Mat2 r;
  r.col(0) = unit_tangent(theta);
  r.col(1) = unit_normal(theta);
  return r * m * r.transpose();
}

Mat2 extrinsic_hessian_w(const ArrivalField& field, const Vec2& x) {
  const Derivatives d = field.derivatives_at(x);
  const double w_pow = (1.0 + field.alpha) * (field.value_at(x) - field.t0);
  if (!(w_pow > 0.0)) throw MaskedPoint("u - t0 is not positive at the sample point");
  const double w = std::pow(w_pow, 1.0 / (1.0 + field.alpha));
  return std::pow(w, -field.alpha) * (d.hess - field.alpha * d.grad * d.grad.transpose() / w_pow);
}

CrossCheckReport equivalence_check(const FlowTrajectory& traj, const ArrivalField& field, std::size_t samples) {
  const auto picks = boundary_samples(traj, field.p_ext, field.r_excl + 5.0 * field.grid.dx, samples, false);
  const double window = skip_window(traj);
  struct Sample {
    bool ok = false;
    double rel = 0.0, lam_int = 0.0, lam_ext = 0.0, t = 0.0, theta = 0.0;
  };
  std::vector<Sample> out(picks.size());
  parallel::for_each_index(picks.size(), [&](std::size_t s) {
    const auto [k, j] = picks[s];
    const FlowSnapshot& snap = traj.snapshots[k];
    if (snap.t - traj.t0 < window) return;
    const double theta = snap.curve.theta(j);
    const Mat2 intrinsic = frame_to_cartesian(intrinsic_hessian_w(snap, j, traj.t0, traj.speed.alpha), theta);
    Mat2 extrinsic;
    try {
      extrinsic = extrinsic_hessian_w(field, boundary_point(snap.curve, j).position);
    } catch (const MaskedPoint&) {
      return;
    }
    Sample& o = out[s];
    o.ok = true;
    o.rel = (intrinsic - extrinsic).norm() / intrinsic.norm();
    o.lam_int = max_eigenvalue(intrinsic);
    o.lam_ext = max_eigenvalue(extrinsic);
    o.t = snap.t;
    o.theta = theta;
  });

  CrossCheckReport rep;
  double sum = 0.0;
  rep.worst_intrinsic_eigenvalue = -std::numeric_limits<double>::infinity();
  rep.worst_extrinsic_eigenvalue = -std::numeric_limits<double>::infinity();
  for (const Sample& o : out) {
    if (!o.ok) {
      ++rep.skipped;
      continue;
    }
    ++rep.samples;
    sum += o.rel;
    if (o.rel > rep.max_rel_discrepancy || rep.samples == 1) {
      rep.max_rel_discrepancy = std::max(rep.max_rel_discrepancy, o.rel);
      rep.witness_t = o.t;
      rep.witness_theta = o.theta;
    }
    rep.worst_intrinsic_eigenvalue = std::max(rep.worst_intrinsic_eigenvalue, o.lam_int);
    rep.worst_extrinsic_eigenvalue = std::max(rep.worst_extrinsic_eigenvalue, o.lam_ext);
    if ((o.lam_int > 0.0) == (o.lam_ext > 0.0)) ++rep.sign_agreements;
  }
  rep.mean_rel_discrepancy = rep.samples ? sum / static_cast<double>(rep.samples) : 0.0;
  return rep;
}

MonotonicityReport time_term_monotonicity(const FlowTrajectory& traj, const std::vector<double>& t0_list) {
  const double window = skip_window(traj);
  std::vector<const FlowSnapshot*> used;
  for (const auto& s : traj.snapshots) {
    if (s.t - traj.t0 >= window) used.push_back(&s);
  }
  if (used.empty()) throw std::invalid_argument("time_term_monotonicity: no snapshots past the skip window");
  const double first = used.front()->t;

  MonotonicityReport rep;
  for (double t0 : t0_list) {
    if (!(t0 < first)) {
      throw std::invalid_argument("time_term_monotonicity: t0 = " + std::to_string(t0) +
                                  " is not below the first snapshot time");
    }
    double q = std::numeric_limits<double>::infinity();
    for (const FlowSnapshot* s : used) {
      q = std::min(q, min_over_nodes(harnack_min(*s, t0, traj.speed.alpha, HarnackMode::with_time_term)).value);
    }
    rep.entries.push_back({t0, q});
  }
  std::sort(rep.entries.begin(), rep.entries.end(),
            [](const MonotonicityEntry& a, const MonotonicityEntry& b) { return a.t0 > b.t0; });
  for (std::size_t i = 1; i < rep.entries.size(); ++i) {
    if (rep.entries[i].q_min > rep.entries[i - 1].q_min) rep.nonincreasing = false;
    if (!(rep.entries[i].q_min < rep.entries[i - 1].q_min)) rep.strictly_decreasing = false;
  }
  return rep;
}

void to_json(nlohmann::json& j, const CrossCheckReport& r) {
  j = nlohmann::json{{"samples", r.samples},
                     {"skipped", r.skipped},
                     {"max_rel_discrepancy", r.max_rel_discrepancy},
                     {"mean_rel_discrepancy", r.mean_rel_discrepancy},
                     {"witness", {{"t", r.witness_t}, {"theta", r.witness_theta}}},
                     {"worst_intrinsic_eigenvalue", r.worst_intrinsic_eigenvalue},
                     {"worst_extrinsic_eigenvalue", r.worst_extrinsic_eigenvalue},
                     {"sign_agreements", r.sign_agreements}};
}

void to_json(nlohmann::json& j, const HarnackReport& r) {
  j = nlohmann::json{{"q_min", r.q_min},
                     {"witness", {{"t", r.witness_t}, {"theta", r.witness_theta}}},
                     {"alpha", r.alpha},
                     {"t0", r.t0},
                     {"mode", to_string(r.mode)},
                     {"skipped", r.skipped},
                     {"snapshots", r.per_snapshot.size()},
                     {"tolerance", r.tolerance},
                     {"verdict", to_string(r.verdict)}};
  if (r.cross_check) j["cross_check"] = *r.cross_check;
}

void to_json(nlohmann::json& j, const MonotonicityReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) entries.push_back({{"t0", e.t0}, {"q_min", e.q_min}});
  j = nlohmann::json{{"entries", entries},
                     {"nonincreasing", r.nonincreasing},
                     {"strictly_decreasing", r.strictly_decreasing}};
}

}  // namespace arrivallab
