#include "arrivallab/arrival_time.hpp"
#include "arrivallab/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <memory>

using namespace arrivallab;

namespace {

Grid square_grid(double half_width, double dx) {
  Grid g;
  g.dx = dx;
  g.nx = g.ny = static_cast<std::size_t>(std::lround(2 * half_width / dx)) + 1;
  g.x0 = g.y0 = -half_width;
  return g;
}

// u = (1 - |x|^{1+alpha}) / (1 + alpha): arrival time of the unit circle under kappa^alpha.
ArrivalField circle_field(double alpha, double dx, int order = 4) {
  return synthetic_field(
      square_grid(1.1, dx), [alpha](const Vec2& x) { return (1.0 - std::pow(x.norm(), 1.0 + alpha)) / (1.0 + alpha); },
      [](const Vec2& x) { return 1.0 - x.norm(); }, 0.0, 1.0 / (1.0 + alpha), Vec2::Zero(), alpha, 0.1, order);
}

const FlowTrajectory& circle_trajectory(double alpha) {
  static std::map<double, FlowTrajectory> cache;
  auto it = cache.find(alpha);
  if (it == cache.end()) {
    it = cache.emplace(alpha, run(SupportCurve::circle(128, 1.0), make_speed("kappa", 1, alpha), 0.0)).first;
  }
  return it->second;
}

const ArrivalField& reconstructed_circle(double alpha) {
  static std::map<double, ArrivalField> cache;
  auto it = cache.find(alpha);
  if (it == cache.end()) {
    GridSpec spec;
    spec.dx = 1.0 / 64.0;
    it = cache.emplace(alpha, reconstruct(circle_trajectory(alpha), spec)).first;
  }
  return it->second;
}

}  // namespace

TEST(Reconstruct, CircleMcfClosedForm) {
  const auto& f = reconstructed_circle(1.0);
  EXPECT_NEAR(f.value_at({0.6, 0.0}), 0.32, 1e-5);
  for (std::size_t j = 0; j < f.grid.ny; ++j) {
    for (std::size_t i = 0; i < f.grid.nx; ++i) {
      if (f.mask_at(i, j) != CellMask::interior) continue;
      const double r = f.grid.point(i, j).norm();
      ASSERT_NEAR(f.u_at(i, j), 0.5 * (1 - r * r), 1e-5);
    }
  }
}

TEST(Reconstruct, CirclePowerFlowClosedForm) {
  const auto& f = reconstructed_circle(3.0);
  EXPECT_NEAR(f.value_at({0.5, 0.5}), 0.1875, 1e-5);
}

TEST(Reconstruct, MaskAndBounds) {
  const auto& f = reconstructed_circle(1.0);
  std::size_t counts[4] = {0, 0, 0, 0};
  for (std::size_t j = 0; j < f.grid.ny; ++j) {
    for (std::size_t i = 0; i < f.grid.nx; ++i) {
      const CellMask m = f.mask_at(i, j);
      ++counts[static_cast<int>(m)];
      const Vec2 x = f.grid.point(i, j);
      const double u = f.u_at(i, j);
      if (m == CellMask::exterior) {
        EXPECT_EQ(u, f.t0);
      }
      if (m == CellMask::extinction_ball) {
        EXPECT_LT((x - f.p_ext).norm(), f.r_excl + 1e-12);
      }
      if (m == CellMask::interior) {
        EXPECT_GE(u, f.t0);
        EXPECT_LE(u, f.T_ext);
      }
      if (m == CellMask::boundary_layer && std::abs(x.norm() - 1.0) < 1e-12) {
        EXPECT_EQ(u, f.t0);
      }
    }
  }
  EXPECT_EQ(counts[0] + counts[1] + counts[2] + counts[3], f.grid.size());
  for (auto c : counts) EXPECT_GT(c, 0u);
}

TEST(Reconstruct, NonIncreasingAlongRays) {
  const auto& f = reconstructed_circle(1.0);
  for (double a : {0.0, 0.7, 2.1, 4.0}) {
    const Vec2 dir(std::cos(a), std::sin(a));
    double prev = f.T_ext;
    for (double r = f.r_excl + 0.05; r < 0.9; r += 0.02) {
      const Vec2 x = f.p_ext + r * dir;
      if (!f.interpolable(x)) continue;
      const double u = f.value_at(x);
      EXPECT_LE(u, prev + 1e-12);
      prev = u;
    }
  }
}

TEST(Reconstruct, BoundaryNodeIsExactlyStartTime) {
  // Node (1, 0) lies on the initial circle for a grid that contains it.
  GridSpec spec;
  spec.dx = 1.0 / 32.0;
  const auto f = reconstruct(circle_trajectory(1.0), spec);
  bool seen = false;
  for (std::size_t j = 0; j < f.grid.ny; ++j) {
    for (std::size_t i = 0; i < f.grid.nx; ++i) {
      const Vec2 x = f.grid.point(i, j);
      if ((x - Vec2(1.0, 0.0)).norm() < 1e-12) {
        seen = true;
        EXPECT_EQ(f.u_at(i, j), f.t0);
        EXPECT_EQ(f.mask_at(i, j), CellMask::boundary_layer);
      }
    }
  }
  EXPECT_TRUE(seen);
}

TEST(GradientIdentity, CircleAtHalfRadius) {
  GridSpec spec;
  spec.dx = 1.0 / 256.0;
  const auto f = reconstruct(circle_trajectory(1.0), spec);
  const Vec2 g = f.derivatives_at({0.5, 0.0}).grad;
  EXPECT_NEAR(g.x(), -0.5, 2e-3);
  EXPECT_NEAR(g.y(), 0.0, 2e-3);
  const auto rep = gradient_identity_residual(f, circle_trajectory(1.0), 200);
  EXPECT_GT(rep.count, 150u);
  EXPECT_LT(rep.max_value, 2e-3);
}

TEST(GradientIdentity, InitialSnapshotSamples) {
  const auto& f = reconstructed_circle(1.0);
  const auto rep = gradient_identity_residual(f, circle_trajectory(1.0), 64, true);
  EXPECT_LT(rep.max_value, 5e-2);
  // Fitted gradient alone at a point of the initial boundary: Du = -nu / F with F = 1.
  const Vec2 g = fitted_gradient(f, {std::cos(0.3), std::sin(0.3)});
  EXPECT_NEAR(g.x(), -std::cos(0.3), 5e-2);
  EXPECT_NEAR(g.y(), -std::sin(0.3), 5e-2);
}

TEST(LevelSetResidual, ExactCircleFields) {
  const auto mcf = make_speed("kappa", 1, 1);
  EXPECT_LT(level_set_residual_sweep(circle_field(1.0, 1.0 / 256.0), mcf).max_value, 1e-6);
  for (double alpha : {1.0 / 3.0, 2.0, 3.0}) {
    const auto rep = level_set_residual_sweep(circle_field(alpha, 1.0 / 256.0), make_speed("kappa", 1, alpha));
    EXPECT_GT(rep.count, 1000u);
    EXPECT_LT(rep.max_value, 1e-5) << "alpha " << alpha;
  }
}

TEST(LevelSetResidual, SecondOrderStencilsConvergeQuadratically) {
  const auto speed = make_speed("kappa", 1, 2);
  const double coarse = level_set_residual_sweep(circle_field(2.0, 1.0 / 64.0, 2), speed).max_value;
  const double fine = level_set_residual_sweep(circle_field(2.0, 1.0 / 128.0, 2), speed).max_value;
  EXPECT_NEAR(std::log2(coarse / fine), 2.0, 0.5);
}

TEST(LevelSetCurvature, ConeAndHemisphere) {
  // dx = 1/80 puts x = 0.3, 0.5 and 0.6 on nodes: node index = (x + 1.1) * 80.
  const double dx = 1.0 / 80.0;
  const auto node = [](double x) { return static_cast<std::size_t>(std::lround((x + 1.1) * 80)); };
  const auto cone = synthetic_field(
      square_grid(1.1, dx), [](const Vec2& x) { return 1.0 - x.norm(); },
      [](const Vec2& x) { return 1.0 - x.norm(); }, -1.0, 1.0, Vec2::Zero(), 1.0, 0.1);
  EXPECT_NEAR(level_set_curvature(cone, node(0.5), node(0.0)), 2.0, 1e-6);

  auto hemi = std::make_shared<const ArrivalField>(circle_field(1.0, dx));
  const auto w = make_transformed(hemi, TransformKind::sqrt_power);
  EXPECT_NEAR(level_set_curvature(w, node(0.6), node(0.0)), 1.0 / 0.6, 1e-5);
  EXPECT_NEAR(w.values[hemi->grid.index(node(0.6), node(0.0))], std::sqrt(1 - 0.36), 1e-12);
}

TEST(LevelSetCurvature, InvariantUnderMonotoneTransforms) {
  auto field = std::make_shared<const ArrivalField>(reconstructed_circle(1.0));
  const auto w = make_transformed(field, TransformKind::sqrt_power);
  const auto l = make_transformed(field, TransformKind::log);
  std::size_t n = 0;
  for (std::size_t j = 0; j < field->grid.ny; ++j) {
    for (std::size_t i = 0; i < field->grid.nx; ++i) {
      if (!field->hessian_valid(i, j)) continue;
      const double k = level_set_curvature(*field, i, j);
      EXPECT_NEAR(level_set_curvature(w, i, j), k, 1e-8 * std::max(1.0, std::abs(k)));
      EXPECT_NEAR(level_set_curvature(l, i, j), k, 1e-8 * std::max(1.0, std::abs(k)));
      ++n;
    }
  }
  EXPECT_GT(n, 1000u);
}

TEST(Transform, ValuesAndDerivatives) {
  const auto a = apply_transform(TransformKind::sqrt_power, 1.5, 1.0, 1.0);  // sqrt(2 (u - t0))
  EXPECT_NEAR(a.value, 1.0, 1e-15);
  EXPECT_NEAR(a.d1, 1.0, 1e-15);
  EXPECT_NEAR(a.d2, -1.0, 1e-15);
  const auto b = apply_transform(TransformKind::log, 3.0, 1.0, 1.0);
  EXPECT_NEAR(b.value, std::log(2.0), 1e-15);
  EXPECT_NEAR(b.d1, 0.5, 1e-15);
  EXPECT_NEAR(b.d2, -0.25, 1e-15);
  const auto c = apply_transform(TransformKind::sqrt_power, 0.0 + 0.25 * 0.25, 0.0, 3.0);  // (4u)^{1/4}
  EXPECT_NEAR(c.value, std::pow(0.25, 0.25), 1e-15);
  for (auto k : {TransformKind::sqrt_power, TransformKind::log, TransformKind::raw}) {
    EXPECT_EQ(parse_transform_kind(to_string(k)), k);
  }
}

TEST(Transform, ChainRuleMatchesDirectDifferencesAwayFromBoundary) {
  auto field = std::make_shared<const ArrivalField>(circle_field(1.0, 1.0 / 80.0));
  const auto w = make_transformed(field, TransformKind::sqrt_power);
  const std::size_t j = 88, i = 112;  // x = (0.3, 0)
  const auto a = w.derivatives(i, j);
  const auto b = w.direct_derivatives(i, j);
  EXPECT_LT((a.grad - b.grad).norm(), 1e-6);
  EXPECT_LT((a.hess - b.hess).norm(), 1e-5);
}

TEST(Interpolation, ExactOnMatchingPolynomials) {
  const auto g = square_grid(1.0, 0.05);
  const auto cubic = [](const Vec2& x) { return 1 + x.x() - 2 * x.y() * x.y() + x.x() * x.x() * x.y() - x.y() * x.y() * x.y(); };
  const auto bilinear = [](const Vec2& x) { return 1 + x.x() - 2 * x.y() + 3 * x.x() * x.y(); };
  const auto inside = [](const Vec2&) { return 1.0; };
  auto fc = synthetic_field(g, cubic, inside, -5, 5, Vec2(2, 2), 1, 0);
  auto fb = synthetic_field(g, bilinear, inside, -5, 5, Vec2(2, 2), 1, 0);
  fb.interpolation = Interpolation::bilinear;
  for (const Vec2& x : {Vec2(0.013, -0.42), Vec2(0.5, 0.5), Vec2(-0.71, 0.333)}) {
    EXPECT_NEAR(fc.value_at(x), cubic(x), 1e-13);
    EXPECT_NEAR(fb.value_at(x), bilinear(x), 1e-13);
  }
  EXPECT_THROW(fc.value_at({5, 5}), MaskedPoint);
  EXPECT_EQ(parse_interpolation("bilinear"), Interpolation::bilinear);
}

TEST(Stencils, OrderFourBeatsOrderTwo) {
  const auto fn = [](const Vec2& x) { return std::exp(x.x()) * std::sin(2 * x.y()); };
  for (int order : {2, 4}) {
    double prev = 0;
    for (double dx : {0.04, 0.02}) {
      const auto g = square_grid(1.0, dx);
      std::vector<double> v(g.size());
      for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) v[g.index(i, j)] = fn(g.point(i, j));
      const std::size_t c = g.nx / 2 + static_cast<std::size_t>(std::lround(0.2 / dx));
      const Vec2 x = g.point(c, c);
      const auto d = grid_derivatives(g, v, c, c, order);
      const double uxy = 2 * std::exp(x.x()) * std::cos(2 * x.y());
      const double err = std::abs(d.hess(0, 1) - uxy) + std::abs(d.grad.x() - fn(x));
      if (prev > 0) {
        EXPECT_NEAR(std::log2(prev / err), order, 0.4) << "order " << order;
      }
      prev = err;
    }
  }
}

TEST(Masking, DerivativesRefuseExcludedStencils) {
  const auto f = circle_field(1.0, 1.0 / 64.0);
  const std::size_t c = f.grid.nx / 2;
  EXPECT_EQ(f.mask_at(c, c), CellMask::extinction_ball);
  EXPECT_THROW(f.derivatives(c, c), MaskedPoint);
  EXPECT_THROW(f.derivatives(0, 0), MaskedPoint);
  EXPECT_THROW(fitted_gradient(f, {5.0, 5.0}), MaskedPoint);
}

TEST(Grid, CoversCurveWithMargin) {
  GridSpec spec;
  spec.dx = 0.1;
  const auto g = make_grid(SupportCurve::ellipse(64, 2.0, 1.0), spec);
  EXPECT_LE(g.x0, -2.0 - 3 * 0.1 + 1e-12);
  EXPECT_GE(g.point(g.nx - 1, 0).x(), 2.0 + 3 * 0.1 - 1e-12);
  EXPECT_LE(g.y0, -1.0 - 0.3 + 1e-12);
}
