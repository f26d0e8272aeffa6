#include "arrivallab/concavity_verifier.hpp"
#include "arrivallab/errors.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <memory>
#include <random>

using namespace arrivallab;

namespace {

Grid square_grid(double half_width, double dx) {
  Grid g;
  g.dx = dx;
  g.nx = g.ny = static_cast<std::size_t>(std::lround(2 * half_width / dx)) + 1;
  g.x0 = g.y0 = -half_width;
  return g;
}

std::shared_ptr<const ArrivalField> circle_field(double alpha, double dx, double r_excl = 0.1, double half = 1.1) {
  return std::make_shared<const ArrivalField>(synthetic_field(
      square_grid(half, dx), [alpha](const Vec2& x) { return (1.0 - std::pow(x.norm(), 1.0 + alpha)) / (1.0 + alpha); },
      [](const Vec2& x) { return 1.0 - x.norm(); }, 0.0, 1.0 / (1.0 + alpha), Vec2::Zero(), alpha, r_excl));
}

// Synthetic convex input u = |x|^2 on the unit disc; p_ext placed off-grid so nothing is excluded.
std::shared_ptr<const ArrivalField> paraboloid(double dx) {
  return std::make_shared<const ArrivalField>(synthetic_field(
      square_grid(1.1, dx), [](const Vec2& x) { return x.squaredNorm(); }, [](const Vec2& x) { return 1.0 - x.norm(); },
      -1.0, 2.0, Vec2(5, 5), 1.0, 0.0));
}

}  // namespace

TEST(Hessian, HemisphereApexIsMinusIdentity) {
  const auto f = circle_field(1.0, 1.0 / 64.0, 0.0, 1.125);
  const auto w = make_transformed(f, TransformKind::sqrt_power);
  const std::size_t c = f->grid.nx / 2;
  ASSERT_LT(f->grid.point(c, c).norm(), 1e-12);
  const Mat2 h = w.derivatives(c, c).hess;
  EXPECT_NEAR(h(0, 0), -1.0, 1e-6);
  EXPECT_NEAR(h(1, 1), -1.0, 1e-6);
  EXPECT_NEAR(h(0, 1), 0.0, 1e-10);
}

TEST(Hessian, CirclePowerProfilesAreConcave) {
  for (double alpha : {1.0 / 3.0, 1.0, 2.0, 3.0}) {
    const auto rep = hessian_concavity(make_transformed(circle_field(alpha, 1.0 / 256.0), TransformKind::sqrt_power), 1e-4);
    EXPECT_EQ(rep.verdict, Verdict::pass) << "alpha " << alpha << " worst " << rep.worst_value;
    EXPECT_LE(rep.worst_value, 1e-4);
    EXPECT_GT(rep.evaluated, 10'000u);
  }
}

TEST(Hessian, RawCircleMcfFieldHasEigenvalueMinusOne) {
  const auto rep = hessian_concavity(make_transformed(circle_field(1.0, 1.0 / 128.0), TransformKind::raw), 1e-3);
  EXPECT_NEAR(rep.worst_value, -1.0, 1e-8);
  EXPECT_EQ(rep.kind, TransformKind::raw);
}

TEST(Hessian, LogOfCircleMcfIsConcave) {
  const auto rep = hessian_concavity(make_transformed(circle_field(1.0, 1.0 / 128.0), TransformKind::log), 1e-3);
  EXPECT_EQ(rep.verdict, Verdict::pass);
}

TEST(KorevaarZ, ConcaveHemisphereIsNonNegative) {
  ZSearchOptions opts;
  opts.triples = 20'000;
  const auto rep = korevaar_z_search(make_transformed(circle_field(1.0, 1.0 / 128.0), TransformKind::sqrt_power), opts, 1e-6);
  EXPECT_EQ(rep.verdict, Verdict::pass);
  EXPECT_GE(rep.worst_value, -1e-6);
}

TEST(KorevaarZ, QuadraticIdentity) {
  const auto u = make_transformed(paraboloid(1.0 / 64.0), TransformKind::raw);
  EXPECT_NEAR(concavity_function(u, 0.5, {0.5, 0.0}, {-0.5, 0.0}), -0.25, 1e-13);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-0.6, 0.6), r01(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vec2 x(d(rng), d(rng)), y(d(rng), d(rng));
    const double r = r01(rng);
    EXPECT_NEAR(concavity_function(u, r, x, y), -r * (1 - r) * (x - y).squaredNorm(), 1e-12);
  }
}

TEST(KorevaarZ, EndpointsAndSymmetry) {
  const auto w = make_transformed(circle_field(2.0, 1.0 / 64.0), TransformKind::sqrt_power);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-0.6, 0.6), r01(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vec2 x(d(rng), d(rng)), y(d(rng), d(rng));
    const double r = r01(rng);
    if (!w.source->interpolable(x) || !w.source->interpolable(y) || !w.source->interpolable(r * x + (1 - r) * y)) continue;
    EXPECT_EQ(concavity_function(w, 0.0, x, y), 0.0);
    EXPECT_EQ(concavity_function(w, 1.0, x, y), 0.0);
    EXPECT_NEAR(concavity_function(w, r, x, y), concavity_function(w, 1 - r, y, x), 1e-14);
  }
}

TEST(KorevaarZ, ConvexFieldFailsWithExactWitness) {
  ZSearchOptions opts;
  opts.triples = 20'000;
  const auto rep = korevaar_z_search(make_transformed(paraboloid(1.0 / 64.0), TransformKind::raw), opts, 1e-4);
  EXPECT_EQ(rep.verdict, Verdict::fail);
  ASSERT_TRUE(rep.witness_triple);
  const auto& t = *rep.witness_triple;
  EXPECT_NEAR(rep.worst_value, -t.r * (1 - t.r) * (t.x - t.y).squaredNorm(), 1e-12);
  EXPECT_LT(rep.worst_value, -0.5);  // refinement pushes toward r = 1/2 across a diameter
}

TEST(KorevaarZ, DeterministicUnderSeed) {
  ZSearchOptions opts;
  opts.triples = 5'000;
  opts.seed = 17;
  const auto w = make_transformed(circle_field(1.0, 1.0 / 64.0), TransformKind::sqrt_power);
  const auto a = korevaar_z_search(w, opts, 1e-4);
  const auto b = korevaar_z_search(w, opts, 1e-4);
  EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
}

TEST(KorevaarZ, AffineInvariantVerdicts) {
  // u(A^{-1} x) for A = [[1.6, 0.4], [0, 0.8]]: level sets become ellipses.
  Eigen::Matrix2d a;
  a << 1.6, 0.4, 0.0, 0.8;
  const Eigen::Matrix2d inv = a.inverse();
  const auto mapped = [&](auto u) { return [u, inv](const Vec2& x) { return u(Vec2(inv * x)); }; };
  const auto hemi = [](const Vec2& x) { return 0.5 * (1 - x.squaredNorm()); };
  const auto para = [](const Vec2& x) { return x.squaredNorm(); };
  const auto dist = [](const Vec2& x) { return 1.0 - x.norm(); };
  ZSearchOptions opts;
  opts.triples = 10'000;
  for (int convex = 0; convex < 2; ++convex) {
    const auto u = convex ? std::function<double(const Vec2&)>(para) : std::function<double(const Vec2&)>(hemi);
    const auto kind = convex ? TransformKind::raw : TransformKind::sqrt_power;
    const auto plain = std::make_shared<const ArrivalField>(
        synthetic_field(square_grid(1.1, 1.0 / 64.0), u, dist, convex ? -1.0 : 0.0, 0.5, Vec2(9, 9), 1.0, 0.0));
    const auto warped = std::make_shared<const ArrivalField>(synthetic_field(
        square_grid(2.2, 1.0 / 64.0), mapped(u), mapped(dist), convex ? -1.0 : 0.0, 0.5, Vec2(9, 9), 1.0, 0.0));
    const auto v1 = korevaar_z_search(make_transformed(plain, kind), opts, 1e-4).verdict;
    const auto v2 = korevaar_z_search(make_transformed(warped, kind), opts, 1e-4).verdict;
    EXPECT_EQ(v1, v2) << "convex " << convex;
    EXPECT_EQ(v1, convex ? Verdict::fail : Verdict::pass);
  }
}

TEST(AncientProxy, CircleMcfWeakensAsReferenceTimeDrops) {
  const auto f = circle_field(1.0, 1.0 / 128.0);
  const auto at_t0 = ancient_proxy_check(*f, 0.0, 1e-3);
  const auto near = ancient_proxy_check(*f, -1.0, 1e-3);
  const auto far = ancient_proxy_check(*f, -10.0, 1e-3);
  EXPECT_EQ(at_t0.verdict, Verdict::pass);
  EXPECT_EQ(near.verdict, Verdict::pass);
  EXPECT_EQ(far.verdict, Verdict::pass);
  // Tangential eigenvalue -1 is untouched; the normal one rises toward -1.
  EXPECT_NEAR(far.worst_value, -1.0, 1e-8);
  EXPECT_GE(far.worst_value, near.worst_value - 1e-12);
  EXPECT_GT(*at_t0.normal_margin, *near.normal_margin);
  EXPECT_GT(*near.normal_margin, *far.normal_margin);
  EXPECT_GT(*far.normal_margin, 1.0);
}

TEST(AncientProxy, ReferenceTimeAtStartMatchesHessianOfW) {
  // For t_ref = t0 the tested matrix is w^alpha D^2w, so verdicts coincide.
  const auto f = circle_field(2.0, 1.0 / 128.0);
  EXPECT_EQ(ancient_proxy_check(*f, 0.0, 1e-3).verdict,
            hessian_concavity(make_transformed(f, TransformKind::sqrt_power), 1e-3).verdict);
}

TEST(AncientProxy, ConvexFieldFailsAndBadReferenceThrows) {
  const auto f = paraboloid(1.0 / 64.0);
  for (double t_ref : {-1.0, -2.0, -11.0}) EXPECT_EQ(ancient_proxy_check(*f, t_ref, 1e-3).verdict, Verdict::fail);
  EXPECT_THROW(ancient_proxy_check(*f, 0.5, 1e-3), std::invalid_argument);
}

TEST(Report, JsonCarriesVerdictAndWitness) {
  ZSearchOptions opts;
  opts.triples = 2'000;
  const auto rep = korevaar_z_search(make_transformed(paraboloid(1.0 / 32.0), TransformKind::raw), opts, 1e-4);
  const nlohmann::json j = rep;
  EXPECT_EQ(j.at("verdict"), "FAIL");
  EXPECT_TRUE(j.at("witness").contains("r"));
  EXPECT_EQ(j.at("method"), "korevaar_z");
  EXPECT_NEAR(max_eigenvalue((Mat2() << 1, 2, 2, 1).finished()), 3.0, 1e-14);
}
