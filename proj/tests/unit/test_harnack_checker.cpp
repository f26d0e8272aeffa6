#include "arrivallab/errors.hpp"
#include "arrivallab/harnack_checker.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>

using namespace arrivallab;

namespace {

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }
double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

const FlowTrajectory& circle_mcf() {
  static const FlowTrajectory traj = run(SupportCurve::circle(128, 1.0), make_speed("kappa", 1, 1), 0.0);
  return traj;
}

}  // namespace

TEST(HarnackMin, CircleMcfClosedForm) {
  // r^2 = 1 - 2t; at t = 1/4 both dtF and the time term equal 2 sqrt 2.
  const auto speed = make_speed("kappa", 1, 1);
  const auto s = make_snapshot(SupportCurve::circle(64, std::sqrt(0.5)), 0.25, speed);
  const auto q = harnack_min(s, 0.0, 1.0, HarnackMode::with_time_term);
  EXPECT_NEAR(min_of(q), 4 * std::numbers::sqrt2, 1e-10);
  EXPECT_NEAR(max_of(q), 4 * std::numbers::sqrt2, 1e-10);
}

TEST(HarnackMin, CirclePowerFlowClosedForm) {
  const double alpha = 3.0, t = 0.125;
  const double r = std::pow(0.5, 0.25);  // r^4 = 1 - 4t
  const auto speed = make_speed("kappa", 1, alpha);
  const auto s = make_snapshot(SupportCurve::circle(64, r), t, speed);
  const double want = 3 * std::pow(r, -7) + 3 * std::pow(r, -3) / (4 * t);
  EXPECT_NEAR(min_of(harnack_min(s, 0.0, alpha, HarnackMode::with_time_term)) / want, 1.0, 1e-12);
  const double ancient = alpha * std::pow(r, -2 * alpha - 1);
  EXPECT_NEAR(min_of(harnack_min(s, 0.0, alpha, HarnackMode::ancient)) / ancient, 1.0, 1e-12);
}

TEST(HarnackMin, AncientBelowTimeTermPointwise) {
  const auto speed = make_speed("kappa", 1, 2);
  const auto s = make_snapshot(SupportCurve::ellipse(128, 1.5, 1.0), 0.1, speed);
  const auto a = harnack_min(s, 0.0, 2.0, HarnackMode::ancient);
  const auto b = harnack_min(s, 0.0, 2.0, HarnackMode::with_time_term);
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_LT(a[j], b[j]);
  EXPECT_THROW(harnack_min(s, 0.1, 2.0, HarnackMode::with_time_term), std::invalid_argument);
}

TEST(HarnackMin, BruteForceOverTangentDirections) {
  const double alpha = 1.0;
  const auto speed = make_speed("kappa", 1, alpha);
  const auto s0 = make_snapshot(SupportCurve::ellipse(128, 2.0, 1.0), 0.0, speed);
  const auto s = step(s0, 0.2, speed);
  const auto q = harnack_min(s, 0.0, alpha, HarnackMode::with_time_term);
  for (std::size_t j = 0; j < q.size(); j += 5) {
    const double time_term = alpha * s.F[j] / ((1 + alpha) * s.t);
    const double centre = -s.F_s[j] / s.kappa[j];
    double best_coarse = std::numeric_limits<double>::infinity(), best_fine = best_coarse;
    for (int k = -2000; k <= 2000; ++k) {
      const double v = centre + 0.37 + k * 1e-3;  // grid offset so the minimiser is not a node
      const double val = s.dtF[j] + 2 * v * s.F_s[j] + s.kappa[j] * v * v + time_term;
      if (k % 100 == 0) best_coarse = std::min(best_coarse, val);
      best_fine = std::min(best_fine, val);
    }
    EXPECT_GE(best_coarse, q[j] - 1e-12);
    EXPECT_GE(best_fine, q[j] - 1e-12);
    EXPECT_LE(best_fine - q[j], best_coarse - q[j]);
    EXPECT_LT(best_fine - q[j], s.kappa[j] * 1e-6);
  }
}

TEST(Report, CircleMcfStaysPositive) {
  const auto rep = harnack_report(circle_mcf(), HarnackMode::with_time_term, 1e-3);
  EXPECT_EQ(rep.verdict, Verdict::pass);
  EXPECT_GT(rep.q_min, 0.0);
  EXPECT_GT(rep.skipped, 0u);
  EXPECT_EQ(rep.per_snapshot.size() + rep.skipped, circle_mcf().snapshots.size());
  const nlohmann::json j = rep;
  EXPECT_EQ(j.at("verdict"), "PASS");
  EXPECT_EQ(j.at("mode"), "with_time_term");
}

TEST(Report, TimeTermMonotoneInStartTime) {
  const auto m = time_term_monotonicity(circle_mcf(), {-10.0, 0.0, -1.0});
  ASSERT_EQ(m.entries.size(), 3u);
  EXPECT_EQ(m.entries[0].t0, 0.0);
  EXPECT_EQ(m.entries[2].t0, -10.0);
  EXPECT_TRUE(m.nonincreasing);
  EXPECT_TRUE(m.strictly_decreasing);
  EXPECT_GT(m.entries[0].q_min, m.entries[1].q_min);
}

TEST(Hessian, IntrinsicMatchesHemisphereOracle) {
  // Circle MCF: w = sqrt(1 - |x|^2), D^2w = -I / w - x x^T / w^3.
  for (std::size_t k = 10; k < circle_mcf().snapshots.size(); k += 40) {
    const auto& s = circle_mcf().snapshots[k];
    for (std::size_t j = 0; j < s.F.size(); j += 13) {
      const auto p = boundary_point(s.curve, j);
      const double w = std::sqrt(1 - p.position.squaredNorm());
      const Mat2 want = -Mat2::Identity() / w - p.position * p.position.transpose() / (w * w * w);
      const Mat2 got = frame_to_cartesian(intrinsic_hessian_w(s, j, 0.0, 1.0), s.curve.theta(j));
      EXPECT_LT((got - want).norm() / want.norm(), 1e-6) << "t " << s.t;
    }
  }
}

TEST(Hessian, FrameConvention) {
  Mat2 m;
  m << 1.0, 0.0, 0.0, 5.0;  // tangent entry 1, normal entry 5
  const Mat2 at_zero = frame_to_cartesian(m, 0.0);
  EXPECT_NEAR(at_zero(0, 0), 5.0, 1e-15);
  EXPECT_NEAR(at_zero(1, 1), 1.0, 1e-15);
  const Mat2 diag = frame_to_cartesian(m, std::numbers::pi / 4);
  EXPECT_NEAR(diag(0, 1), 2.0, 1e-14);
  EXPECT_NEAR(diag.trace(), 6.0, 1e-14);
}

TEST(Equivalence, CircleRoutesAgree) {
  GridSpec spec;
  spec.dx = 1.0 / 128.0;
  const auto field = reconstruct(circle_mcf(), spec);
  const auto rep = equivalence_check(circle_mcf(), field, 200);
  EXPECT_GT(rep.samples, 100u);
  EXPECT_LT(rep.max_rel_discrepancy, 1e-3);
  EXPECT_EQ(rep.sign_agreements, rep.samples);
  EXPECT_LT(rep.worst_intrinsic_eigenvalue, 0.0);
  const nlohmann::json j = rep;
  EXPECT_TRUE(j.contains("witness"));
}

TEST(Mode, NamesRoundTrip) {
  for (auto m : {HarnackMode::with_time_term, HarnackMode::ancient}) EXPECT_EQ(parse_harnack_mode(to_string(m)), m);
  EXPECT_THROW(parse_harnack_mode("sometimes"), ConfigError);
}
