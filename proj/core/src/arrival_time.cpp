#include "arrivallab/arrival_time.hpp"

#include "arrivallab/errors.hpp"
#include "arrivallab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace arrivallab {
namespace {

constexpr double kTieBreak = kBoundaryTieBreak;

bool usable(CellMask m) { return m == CellMask::interior || m == CellMask::boundary_layer; }

int stencil_radius(int order) {
  if (order != 2 && order != 4) throw std::invalid_argument("stencil order must be 2 or 4");
  return order / 2;
}

// Snapshot data needed to evaluate h(theta, t) anywhere on the trajectory.
class TrajectoryInterpolator {
 public:
  explicit TrajectoryInterpolator(const FlowTrajectory& traj) : traj_(traj) {
    const std::size_t n = traj.snapshots.front().curve.theta_count();
    cos_.resize(n);
    sin_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = traj.snapshots.front().curve.theta(j);
      cos_[j] = std::cos(t);
      sin_[j] = std::sin(t);
    }
    speed_interp_.reserve(traj.snapshots.size());
    accel_interp_.reserve(traj.snapshots.size());
    std::vector<double> accel;
    for (const auto& s : traj.snapshots) {
      speed_interp_.emplace_back(s.F);
      accel.resize(s.F.size());
      // d^2h/dt^2 = -dF/dt at fixed theta = -(dtF - F_s^2 / kappa)
      for (std::size_t j = 0; j < accel.size(); ++j) accel[j] = -(s.dtF[j] - s.F_s[j] * s.F_s[j] / s.kappa[j]);
      accel_nodes_.push_back(accel);
      accel_interp_.emplace_back(accel);
    }
    dtheta_ = traj.snapshots.front().curve.dtheta();
  }

  std::size_t count() const { return traj_.snapshots.size(); }
  double time(std::size_t k) const { return traj_.snapshots[k].t; }

  /// Support gap at snapshot k.
  double gap(std::size_t k, const Vec2& p) const {
    const auto& curve = traj_.snapshots[k].curve;
    const auto& h = curve.h();
    const std::size_t j = node_argmax([&](std::size_t i) { return h[i]; }, p);
    const auto& interp = curve.interpolant();
    return maximize_support_residual(p, curve.theta(j), dtheta_, [&](double t) { return interp.eval(t); }).gap;
  }

  struct Eval {
    double gap;
    double slope;  // d gap / dt
  };

  /// Support gap of the curve interpolated between snapshots k and k + 1 by
  /// quintic Hermite in time, matching h, dh/dt = -F and d^2h/dt^2.
  Eval gap_between(std::size_t k, double t, const Vec2& p) const {
    const auto& a = traj_.snapshots[k];
    const auto& b = traj_.snapshots[k + 1];
    const double span = b.t - a.t;
    const double s = (t - a.t) / span;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    // Weights of (h_a, F_a, A_a, h_b, F_b, A_b); F enters with a minus sign.
    const double c[6] = {1 - 10 * s3 + 15 * s4 - 6 * s5,
                         -(s - 6 * s3 + 8 * s4 - 3 * s5) * span,
                         (0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5) * span * span,
                         10 * s3 - 15 * s4 + 6 * s5,
                         -(-4 * s3 + 7 * s4 - 3 * s5) * span,
                         (0.5 * s3 - s4 + 0.5 * s5) * span * span};
    const double d[6] = {(-30 * s2 + 60 * s3 - 30 * s4) / span,
                         -(1 - 18 * s2 + 32 * s3 - 15 * s4),
                         (s - 4.5 * s2 + 6 * s3 - 2.5 * s4) * span,
                         (30 * s2 - 60 * s3 + 30 * s4) / span,
                         -(-12 * s2 + 28 * s3 - 15 * s4),
                         (1.5 * s2 - 4 * s3 + 2.5 * s4) * span};

    const auto &ha = a.curve.h(), &hb = b.curve.h();
    const auto &aa = accel_nodes_[k], &ab = accel_nodes_[k + 1];
    const std::size_t j = node_argmax(
        [&](std::size_t i) {
          return c[0] * ha[i] + c[1] * a.F[i] + c[2] * aa[i] + c[3] * hb[i] + c[4] * b.F[i] + c[5] * ab[i];
        },
        p);

    const TrigInterpolant* parts[6] = {&a.curve.interpolant(), &speed_interp_[k],     &accel_interp_[k],
                                       &b.curve.interpolant(), &speed_interp_[k + 1], &accel_interp_[k + 1]};
    auto h_at = [&](double th) {
      TrigInterpolant::Value v{0.0, 0.0, 0.0};
      for (int q = 0; q < 6; ++q) {
        const auto e = parts[q]->eval(th);
        v.f += c[q] * e.f;
        v.df += c[q] * e.df;
        v.d2f += c[q] * e.d2f;
      }
      return v;
    };
    const SupportGap g = maximize_support_residual(p, a.curve.theta(j), dtheta_, h_at);
    double dh_dt = 0.0;
    for (int q = 0; q < 6; ++q) dh_dt += d[q] * parts[q]->value(g.theta);
    return {g.gap, -dh_dt};
  }

 private:
  template <typename H>
  std::size_t node_argmax(H h, const Vec2& p) const {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < cos_.size(); ++i) {
      const double r = p.x() * cos_[i] + p.y() * sin_[i] - h(i);
      if (r > best) {
        best = r;
        arg = i;
      }
    }
    return arg;
  }

  const FlowTrajectory& traj_;
  std::vector<TrigInterpolant> speed_interp_;
  std::vector<TrigInterpolant> accel_interp_;
  std::vector<std::vector<double>> accel_nodes_;
  std::vector<double> cos_, sin_;
  double dtheta_ = 0.0;
};

double arrival_between(const TrajectoryInterpolator& ti, std::size_t k, const Vec2& p, double g_lo, double g_hi) {
  double a = ti.time(k), b = ti.time(k + 1);
  double t = a + (b - a) * (-g_lo) / (g_hi - g_lo);
  for (int it = 0; it < 100; ++it) {
    const auto e = ti.gap_between(k, t, p);
    if (e.gap >= 0.0) {
      b = t;
    } else {
      a = t;
    }
    if (e.gap == 0.0) return t;
    double next = (e.slope > 0.0) ? t - e.gap / e.slope : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) {
      if (!(e.slope > 0.0)) {
        throw NonMonotoneContainment("support gap is not increasing in time at x = (" +
                                     std::to_string(p.x()) + ", " + std::to_string(p.y()) + ")");
      }
      return next;
    }
    t = next;
    if (b - a <= 4e-16 * std::max(1.0, std::abs(t))) return t;
  }
  return t;
}

}  // namespace

std::string_view to_string(Interpolation interp) {
  return interp == Interpolation::bilinear ? "bilinear" : "cubic";
}

Interpolation parse_interpolation(std::string_view name) {
  if (name == "bilinear") return Interpolation::bilinear;
  if (name == "cubic") return Interpolation::cubic;
  throw ConfigError("unknown interpolation '" + std::string(name) + "'");
}

std::string_view to_string(CellMask mask) {
  switch (mask) {
    case CellMask::interior:
      return "interior";
    case CellMask::boundary_layer:
      return "boundary_layer";
    case CellMask::extinction_ball:
      return "extinction_ball";
    case CellMask::exterior:
      return "exterior";
  }
  return "unknown";
}

Grid make_grid(const SupportCurve& curve, const GridSpec& spec) {
  const auto [lo, hi] = bounding_box(curve);
  const Vec2 extent = hi - lo;
  const Vec2 center = 0.5 * (lo + hi);
  Grid g;
  if (spec.nx > 0) {
    if (spec.nx <= 2 * spec.margin + 2) throw std::invalid_argument("grid nx too small for the margin");
    g.dx = extent.x() / static_cast<double>(spec.nx - 1 - 2 * spec.margin);
  } else {
    if (!(spec.dx > 0.0)) throw std::invalid_argument("grid dx must be positive");
    g.dx = spec.dx;
  }
  auto count = [&](double width) {
    return static_cast<std::size_t>(std::ceil(width / g.dx - 1e-9)) + 1 + 2 * spec.margin;
  };
  g.nx = count(extent.x());
  g.ny = count(extent.y());
  g.x0 = center.x() - 0.5 * static_cast<double>(g.nx - 1) * g.dx;
  g.y0 = center.y() - 0.5 * static_cast<double>(g.ny - 1) * g.dx;
  return g;
}

bool ArrivalField::stencil_valid(std::size_t i, std::size_t j) const {
  const auto r = static_cast<std::size_t>(stencil_radius(stencil_order));
  if (i < r || j < r || i + r >= grid.nx || j + r >= grid.ny) return false;
  for (std::size_t b = j - r; b <= j + r; ++b) {
    for (std::size_t a = i - r; a <= i + r; ++a) {
      if (!usable(mask[grid.index(a, b)])) return false;
    }
  }
  return true;
}

bool ArrivalField::hessian_valid(std::size_t i, std::size_t j) const {
  return mask_at(i, j) == CellMask::interior && stencil_valid(i, j);
}

std::optional<std::pair<std::size_t, std::size_t>> ArrivalField::locate(const Vec2& x) const {
  const double fx = (x.x() - grid.x0) / grid.dx;
  const double fy = (x.y() - grid.y0) / grid.dx;
  if (!(fx >= 0.0 && fy >= 0.0)) return std::nullopt;
  auto i = static_cast<std::size_t>(fx);
  auto j = static_cast<std::size_t>(fy);
  // A point exactly on the last grid line belongs to the last cell.
  if (i + 1 == grid.nx && fx == static_cast<double>(i)) --i;
  if (j + 1 == grid.ny && fy == static_cast<double>(j)) --j;
  if (i + 1 >= grid.nx || j + 1 >= grid.ny) return std::nullopt;
  return std::pair{i, j};
}

bool ArrivalField::interpolable(const Vec2& x) const {
  const auto cell = locate(x);
  if (!cell) return false;
  const auto [i, j] = *cell;
  if (interpolation == Interpolation::bilinear) {
    return mask_at(i, j) == CellMask::interior && mask_at(i + 1, j) == CellMask::interior &&
           mask_at(i, j + 1) == CellMask::interior && mask_at(i + 1, j + 1) == CellMask::interior;
  }
  if (i < 1 || j < 1 || i + 2 >= grid.nx || j + 2 >= grid.ny) return false;
  for (std::size_t b = j - 1; b <= j + 2; ++b) {
    for (std::size_t a = i - 1; a <= i + 2; ++a) {
      if (mask_at(a, b) != CellMask::interior) return false;
    }
  }
  return true;
}

double ArrivalField::value_at(const Vec2& x) const {
  if (!interpolable(x)) {
    throw MaskedPoint("u is not interpolable at (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) + ")");
  }
  const auto [i, j] = *locate(x);
  const double s = (x.x() - grid.x0) / grid.dx - static_cast<double>(i);
  const double r = (x.y() - grid.y0) / grid.dx - static_cast<double>(j);
  if (interpolation == Interpolation::bilinear) {
    return (1 - s) * (1 - r) * u_at(i, j) + s * (1 - r) * u_at(i + 1, j) + (1 - s) * r * u_at(i, j + 1) +
           s * r * u_at(i + 1, j + 1);
  }
  // Cubic Lagrange weights for nodes -1, 0, 1, 2.
  auto weights = [](double t, double* w) {
    w[0] = -t * (t - 1) * (t - 2) / 6;
    w[1] = (t + 1) * (t - 1) * (t - 2) / 2;
    w[2] = -(t + 1) * t * (t - 2) / 2;
    w[3] = (t + 1) * t * (t - 1) / 6;
  };
  double wx[4], wy[4];
  weights(s, wx);
  weights(r, wy);
  double v = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += wx[a] * u_at(i + a - 1, j + b - 1);
    v += wy[b] * row;
  }
  return v;
}

Derivatives grid_derivatives(const Grid& grid, std::span<const double> v, std::size_t i, std::size_t j,
                             int order) {
  const int r = stencil_radius(order);
  auto at = [&](int di, int dj) {
    return v[grid.index(static_cast<std::size_t>(static_cast<long>(i) + di),
                        static_cast<std::size_t>(static_cast<long>(j) + dj))];
  };
  const double h = grid.dx;
  Derivatives d;
  if (r == 1) {
    d.grad.x() = (at(1, 0) - at(-1, 0)) / (2 * h);
    d.grad.y() = (at(0, 1) - at(0, -1)) / (2 * h);
    d.hess(0, 0) = (at(1, 0) - 2 * at(0, 0) + at(-1, 0)) / (h * h);
    d.hess(1, 1) = (at(0, 1) - 2 * at(0, 0) + at(0, -1)) / (h * h);
    d.hess(0, 1) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
  } else {
    static constexpr double w1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    static constexpr double w2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    double gx = 0, gy = 0, hxx = 0, hyy = 0, hxy = 0;
    for (int a = -2; a <= 2; ++a) {
      gx += w1[a + 2] * at(a, 0);
      gy += w1[a + 2] * at(0, a);
      hxx += w2[a + 2] * at(a, 0);
      hyy += w2[a + 2] * at(0, a);
      if (a == 0) continue;
      for (int b = -2; b <= 2; ++b) {
        if (b != 0) hxy += w1[a + 2] * w1[b + 2] * at(a, b);
      }
    }
    d.grad = Vec2(gx, gy) / h;
    d.hess(0, 0) = hxx / (h * h);
    d.hess(1, 1) = hyy / (h * h);
    d.hess(0, 1) = hxy / (h * h);
  }
  d.hess(1, 0) = d.hess(0, 1);
  return d;
}

Derivatives ArrivalField::derivatives(std::size_t i, std::size_t j) const {
  if (!stencil_valid(i, j)) {
    throw MaskedPoint("FD stencil at node (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") touches a masked cell");
  }
  return grid_derivatives(grid, u, i, j, stencil_order);
}

Derivatives ArrivalField::derivatives_at(const Vec2& x) const {
  const auto cell = locate(x);
  if (!cell) throw MaskedPoint("point outside the grid");
  const auto [i, j] = *cell;
  const double s = (x.x() - grid.x0) / grid.dx - static_cast<double>(i);
  const double r = (x.y() - grid.y0) / grid.dx - static_cast<double>(j);
  const Derivatives d00 = derivatives(i, j), d10 = derivatives(i + 1, j);
  const Derivatives d01 = derivatives(i, j + 1), d11 = derivatives(i + 1, j + 1);
  const double w00 = (1 - s) * (1 - r), w10 = s * (1 - r), w01 = (1 - s) * r, w11 = s * r;
  Derivatives d;
  d.grad = w00 * d00.grad + w10 * d10.grad + w01 * d01.grad + w11 * d11.grad;
  d.hess = w00 * d00.hess + w10 * d10.hess + w01 * d01.hess + w11 * d11.hess;
  return d;
}

ArrivalField synthetic_field(const Grid& grid, const std::function<double(const Vec2&)>& u,
                             const std::function<double(const Vec2&)>& boundary_distance, double t0,
                             double T_ext, Vec2 p_ext, double alpha, double r_excl, int stencil_order) {
  stencil_radius(stencil_order);
  ArrivalField f;
  f.grid = grid;
  f.t0 = t0;
  f.T_ext = T_ext;
  f.p_ext = p_ext;
  f.alpha = alpha;
  f.r_excl = r_excl;
  f.stencil_order = stencil_order;
  f.u.resize(grid.size());
  f.mask.resize(grid.size());
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const Vec2 x = grid.point(i, j);
      const std::size_t idx = grid.index(i, j);
      const double dist = boundary_distance(x);
      if (dist < 0.0) {
        f.mask[idx] = CellMask::exterior;
        f.u[idx] = t0;
        continue;
      }
      f.u[idx] = u(x);
      if ((x - p_ext).norm() < r_excl) {
        f.mask[idx] = CellMask::extinction_ball;
      } else if (dist <= 2.0 * grid.dx) {
        f.mask[idx] = CellMask::boundary_layer;
      } else {
        f.mask[idx] = CellMask::interior;
      }
    }
  }
  return f;
}

ArrivalField reconstruct(const FlowTrajectory& traj, const GridSpec& spec) {
  if (traj.status != FlowStatus::completed) {
    throw std::invalid_argument("reconstruct needs a completed trajectory (status " +
                                std::string(to_string(traj.status)) + ")");
  }
  if (traj.snapshots.size() < 2) throw std::invalid_argument("reconstruct needs at least two snapshots");
  stencil_radius(spec.stencil_order);

  const SupportCurve& initial = traj.snapshots.front().curve;
  ArrivalField f;
  f.grid = make_grid(initial, spec);
  f.t0 = traj.t0;
  f.T_ext = traj.T_ext;
  f.p_ext = traj.p_ext;
  f.alpha = traj.speed.alpha;
  f.stencil_order = spec.stencil_order;
  f.interpolation = spec.interpolation;
  f.r_excl = spec.r_excl > 0.0 ? spec.r_excl : std::max(5.0 * f.grid.dx, 0.1 * traj.initial_inradius);
  f.u.assign(f.grid.size(), traj.t0);
  f.mask.assign(f.grid.size(), CellMask::exterior);

  const TrajectoryInterpolator ti(traj);
  const std::size_t last = ti.count() - 1;
  const Vec2 origin = initial.origin();
  const double layer = 2.0 * f.grid.dx;

  parallel::for_each_index(f.grid.ny, [&](std::size_t j) {
    for (std::size_t i = 0; i < f.grid.nx; ++i) {
      const Vec2 x = f.grid.point(i, j);
      const Vec2 p = x - origin;
      const std::size_t idx = f.grid.index(i, j);
      const double g0 = ti.gap(0, p);
      if (g0 > kTieBreak) continue;  // exterior, u = t0
      const bool in_ball = (x - f.p_ext).norm() < f.r_excl;
      if (g0 >= -kTieBreak) {
        f.u[idx] = traj.t0;
        f.mask[idx] = in_ball ? CellMask::extinction_ball : CellMask::boundary_layer;
        continue;
      }
      const double g_last = ti.gap(last, p);
      if (g_last < 0.0) {
        f.u[idx] = traj.T_ext;
        f.mask[idx] = CellMask::extinction_ball;
        continue;
      }
      std::size_t lo = 0, hi = last;
      double g_lo = g0, g_hi = g_last;
      while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        const double g = ti.gap(mid, p);
        if (g >= 0.0) {
          hi = mid;
          g_hi = g;
        } else {
          lo = mid;
          g_lo = g;
        }
      }
      f.u[idx] = g_hi == 0.0 ? ti.time(hi) : arrival_between(ti, lo, p, g_lo, g_hi);
      if (in_ball) {
        f.mask[idx] = CellMask::extinction_ball;
      } else if (g0 >= -layer) {
        f.mask[idx] = CellMask::boundary_layer;
      } else {
        f.mask[idx] = CellMask::interior;
      }
    }
  });
  return f;
}

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::sqrt_power:
      return "sqrt_power";
    case TransformKind::log:
      return "log";
    case TransformKind::raw:
      return "raw";
  }
  return "unknown";
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "sqrt_power") return TransformKind::sqrt_power;
  if (name == "log") return TransformKind::log;
  if (name == "raw") return TransformKind::raw;
  throw ConfigError("unknown transform kind '" + std::string(name) + "'");
}

TransformValue apply_transform(TransformKind kind, double u, double t0, double alpha) {
  const double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case TransformKind::sqrt_power: {
      const double q = (1.0 + alpha) * (u - t0);
      if (!(q > 0.0)) return {0.0, inf, -inf};
      const double w = std::pow(q, 1.0 / (1.0 + alpha));
      const double wa = std::pow(w, -alpha);
      return {w, wa, -alpha * wa * wa / w};
    }
    case TransformKind::log: {
      const double v = u - t0;
      if (!(v > 0.0)) return {-inf, inf, -inf};
      return {std::log(v), 1.0 / v, -1.0 / (v * v)};
    }
    case TransformKind::raw:
      return {u, 1.0, 0.0};
  }
  return {u, 1.0, 0.0};
}

TransformedField make_transformed(std::shared_ptr<const ArrivalField> field, TransformKind kind) {
  if (!field) throw std::invalid_argument("make_transformed: null field");
  TransformedField w;
  w.kind = kind;
  w.source = std::move(field);
  const auto& f = *w.source;
  w.values.resize(f.u.size());
  for (std::size_t idx = 0; idx < f.u.size(); ++idx) {
    w.values[idx] =
        usable(f.mask[idx]) ? apply_transform(kind, f.u[idx], f.t0, f.alpha).value : std::numeric_limits<double>::quiet_NaN();
  }
  return w;
}

Derivatives TransformedField::derivatives(std::size_t i, std::size_t j) const {
  const Derivatives d = source->derivatives(i, j);
  const auto phi = apply_transform(kind, source->u_at(i, j), source->t0, source->alpha);
  Derivatives out;
  out.grad = phi.d1 * d.grad;
  out.hess = phi.d1 * d.hess + phi.d2 * d.grad * d.grad.transpose();
  return out;
}

Derivatives TransformedField::direct_derivatives(std::size_t i, std::size_t j) const {
  if (!source->stencil_valid(i, j)) {
    throw MaskedPoint("FD stencil at node (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") touches a masked cell");
  }
  const Derivatives d = grid_derivatives(source->grid, values, i, j, source->stencil_order);
  if (!d.grad.allFinite() || !d.hess.allFinite()) {
    throw MaskedPoint("transformed values are not finite on the stencil at node (" + std::to_string(i) + ", " +
                      std::to_string(j) + ")");
  }
  return d;
}

double level_set_curvature(const Derivatives& d) {
  const double g = d.grad.norm();
  if (!(g > kGradientFloor)) throw DegenerateGradient("|Du| below the gradient floor");
  const Vec2 tangent(-d.grad.y() / g, d.grad.x() / g);
  return -tangent.dot(d.hess * tangent) / g;
}

double level_set_curvature(const ArrivalField& field, std::size_t i, std::size_t j) {
  return level_set_curvature(field.derivatives(i, j));
}

double level_set_curvature(const TransformedField& field, std::size_t i, std::size_t j) {
  return level_set_curvature(field.derivatives(i, j));
}

double level_set_residual(const ArrivalField& field, const SpeedSpec& speed, std::size_t i, std::size_t j) {
  const Derivatives d = field.derivatives(i, j);
  const double kappa = level_set_curvature(d);
  return d.grad.norm() * curve_speed(speed, kappa) - 1.0;
}

ResidualReport level_set_residual_sweep(const ArrivalField& field, const SpeedSpec& speed) {
  struct Row {
    double max = 0.0, sum = 0.0;
    std::size_t count = 0, arg = 0;
  };
  std::vector<Row> rows(field.grid.ny);
  parallel::for_each_index(field.grid.ny, [&](std::size_t j) {
    Row& row = rows[j];
    for (std::size_t i = 0; i < field.grid.nx; ++i) {
      if (!field.hessian_valid(i, j)) continue;
      const double r = std::abs(level_set_residual(field, speed, i, j));
      row.sum += r;
      ++row.count;
      if (r > row.max || row.count == 1) {
        row.max = std::max(row.max, r);
        row.arg = i;
      }
    }
  });
  ResidualReport rep;
  double sum = 0.0;
  bool first = true;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const Row& row = rows[j];
    if (row.count == 0) continue;
    sum += row.sum;
    rep.count += row.count;
    if (first || row.max > rep.max_value) {
      rep.max_value = row.max;
      rep.witness = field.grid.point(row.arg, j);
      first = false;
    }
  }
  rep.mean_value = rep.count ? sum / static_cast<double>(rep.count) : 0.0;
  return rep;
}

Vec2 fitted_gradient(const ArrivalField& field, const Vec2& x) {
  const Grid& g = field.grid;
  const double radius = 2.5 * g.dx;
  const double fx = (x.x() - g.x0) / g.dx, fy = (x.y() - g.y0) / g.dx;
  const long i0 = static_cast<long>(std::floor(fx - 2.5)), i1 = static_cast<long>(std::ceil(fx + 2.5));
  const long j0 = static_cast<long>(std::floor(fy - 2.5)), j1 = static_cast<long>(std::ceil(fy + 2.5));
  std::vector<Eigen::Matrix<double, 6, 1>> rows;
  std::vector<double> rhs;
  for (long j = std::max(0L, j0); j <= std::min(static_cast<long>(g.ny) - 1, j1); ++j) {
    for (long i = std::max(0L, i0); i <= std::min(static_cast<long>(g.nx) - 1, i1); ++i) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      if (!usable(field.mask_at(ui, uj))) continue;
      const Vec2 d = (g.point(ui, uj) - x) / g.dx;
      if (d.norm() * g.dx > radius) continue;
      Eigen::Matrix<double, 6, 1> r;
      r << 1.0, d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
      rows.push_back(r);
      rhs.push_back(field.u_at(ui, uj));
    }
  }
  if (rows.size() < 8) throw MaskedPoint("too few usable nodes for a local fit");
  Eigen::MatrixXd a(rows.size(), 6);
  Eigen::VectorXd b(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    a.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
    b(static_cast<Eigen::Index>(k)) = rhs[k];
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < 6) throw MaskedPoint("local fit is rank deficient");
  const Eigen::VectorXd c = qr.solve(b);
  return Vec2(c(1), c(2)) / g.dx;
}

std::vector<std::pair<std::size_t, std::size_t>> boundary_samples(const FlowTrajectory& traj, const Vec2& p_ext,
                                                                  double clearance, std::size_t samples,
                                                                  bool include_initial) {
  std::vector<std::size_t> eligible;
  for (std::size_t k = include_initial ? 0 : 1; k < traj.snapshots.size(); ++k) {
    const auto& curve = traj.snapshots[k].curve;
    const Vec2 q = p_ext - curve.origin();
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < curve.theta_count(); ++j) {
      dist = std::min(dist, curve.h()[j] - q.dot(unit_normal(curve.theta(j))));
    }
    if (dist >= clearance) eligible.push_back(k);
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (eligible.empty() || samples == 0) return out;
  const std::size_t n = traj.snapshots.front().curve.theta_count();
  out.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t k = eligible[s * eligible.size() / samples];
    out.emplace_back(k, (s * 37 + s / n) % n);
  }
  return out;
}

ResidualReport gradient_identity_residual(const ArrivalField& field, const FlowTrajectory& traj,
                                          std::size_t samples, bool include_initial) {
  const double clearance = field.r_excl + 5.0 * field.grid.dx;
  const auto picks = boundary_samples(traj, field.p_ext, clearance, samples, include_initial);
  std::vector<double> err(picks.size(), -1.0);
  std::vector<Vec2> where(picks.size());
  parallel::for_each_index(picks.size(), [&](std::size_t s) {
    const auto [k, j] = picks[s];
    const auto& snap = traj.snapshots[k];
    const BoundaryPoint bp = boundary_point(snap.curve, j);
    const Vec2 expected = -bp.normal / snap.F[j];
    Vec2 num;
    try {
      num = field.derivatives_at(bp.position).grad;
    } catch (const MaskedPoint&) {
      try {
        num = fitted_gradient(field, bp.position);
      } catch (const MaskedPoint&) {
        return;
      }
    }
    err[s] = (num - expected).norm() / expected.norm();
    where[s] = bp.position;
  });
  ResidualReport rep;
  double sum = 0.0;
  for (std::size_t s = 0; s < err.size(); ++s) {
    if (err[s] < 0.0) continue;
    sum += err[s];
    if (rep.count == 0 || err[s] > rep.max_value) {
      rep.max_value = err[s];
      rep.witness = where[s];
    }
    ++rep.count;
  }
  rep.mean_value = rep.count ? sum / static_cast<double>(rep.count) : 0.0;
  return rep;
}

}  // namespace arrivallab
