#include "arrivallab/concavity_verifier.hpp"

#include "arrivallab/errors.hpp"
#include "arrivallab/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace arrivallab {
namespace {

struct CellExtreme {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  std::size_t count = 0;
  double extra = 0.0;  // per-row accumulator for auxiliary statistics
};

// Deterministic row-parallel max over hessian_valid cells.
template <typename Fn>
std::vector<CellExtreme> sweep_rows(const ArrivalField& f, Fn&& value_at_cell) {
  std::vector<CellExtreme> rows(f.grid.ny);
  parallel::for_each_index(f.grid.ny, [&](std::size_t j) {
    CellExtreme& row = rows[j];
    for (std::size_t i = 0; i < f.grid.nx; ++i) {
      if (!f.hessian_valid(i, j)) continue;
      double extra = 0.0;
      const double v = value_at_cell(i, j, extra);
      row.extra += extra;
      ++row.count;
      if (v > row.value) {
        row.value = v;
        row.arg = i;
      }
    }
  });
  return rows;
}

struct Reduced {
  double value = -std::numeric_limits<double>::infinity();
  Vec2 where = Vec2::Zero();
  std::size_t count = 0;
  double extra = 0.0;
};

Reduced reduce_rows(const ArrivalField& f, const std::vector<CellExtreme>& rows) {
  Reduced r;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    r.count += rows[j].count;
    r.extra += rows[j].extra;
    if (rows[j].count > 0 && rows[j].value > r.value) {
      r.value = rows[j].value;
      r.where = f.grid.point(rows[j].arg, j);
    }
  }
  return r;
}

nlohmann::json vec_json(const Vec2& v) { return nlohmann::json::array({v.x(), v.y()}); }

}  // namespace

std::string_view to_string(ConcavityMethod method) {
  switch (method) {
    case ConcavityMethod::hessian:
      return "hessian";
    case ConcavityMethod::korevaar_z:
      return "korevaar_z";
    case ConcavityMethod::ancient_proxy:
      return "ancient_proxy";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const ConcavityReport& r) {
  j = nlohmann::json{{"method", to_string(r.method)},
                     {"kind", to_string(r.kind)},
                     {"worst_value", r.worst_value},
                     {"verdict", to_string(r.verdict)},
                     {"tolerance", r.tolerance},
                     {"evaluated", r.evaluated}};
  if (r.witness_triple) {
    j["witness"] = {{"r", r.witness_triple->r}, {"x", vec_json(r.witness_triple->x)}, {"y", vec_json(r.witness_triple->y)}};
  } else {
    j["witness"] = {{"cell", vec_json(r.witness_cell)}};
  }
  nlohmann::json trend = nlohmann::json::array();
  for (const auto& [dx, v] : r.refinement_trend) trend.push_back({{"dx", dx}, {"worst_value", v}});
  j["refinement_trend"] = trend;
  if (r.direct_worst_value) j["direct_worst_value"] = *r.direct_worst_value;
  if (r.t_ref) j["t_ref"] = *r.t_ref;
  if (r.normal_margin) j["normal_margin"] = *r.normal_margin;
}

double max_eigenvalue(const Mat2& m) {
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double half = 0.5 * (m(0, 0) - m(1, 1));
  const double off = 0.5 * (m(0, 1) + m(1, 0));
  return mean + std::hypot(half, off);
}

ConcavityReport hessian_concavity(const TransformedField& field, double tol) {
  const ArrivalField& f = *field.source;
  std::vector<double> direct_rows(f.grid.ny, -std::numeric_limits<double>::infinity());
  const auto rows = sweep_rows(f, [&](std::size_t i, std::size_t j, double&) {
    const double v = max_eigenvalue(field.derivatives(i, j).hess);
    try {
      direct_rows[j] = std::max(direct_rows[j], max_eigenvalue(field.direct_derivatives(i, j).hess));
    } catch (const MaskedPoint&) {
    }
    return v;
  });
  const Reduced red = reduce_rows(f, rows);

  ConcavityReport rep;
  rep.method = ConcavityMethod::hessian;
  rep.kind = field.kind;
  rep.tolerance = tol;
  rep.evaluated = red.count;
  rep.worst_value = red.value;
  rep.witness_cell = red.where;
  rep.verdict = (red.count > 0 && red.value <= tol) ? Verdict::pass : Verdict::fail;
  double direct = -std::numeric_limits<double>::infinity();
  for (double v : direct_rows) direct = std::max(direct, v);
  if (std::isfinite(direct)) rep.direct_worst_value = direct;
  return rep;
}

double concavity_function(const TransformedField& field, double r, const Vec2& x, const Vec2& y) {
  const Vec2 z = r * x + (1.0 - r) * y;
  return field.value_at(z) - r * field.value_at(x) - (1.0 - r) * field.value_at(y);
}

ConcavityReport korevaar_z_search(const TransformedField& field, const ZSearchOptions& opts, double tol) {
  const ArrivalField& f = *field.source;
  const Grid& g = f.grid;
  const Vec2 lo(g.x0, g.y0);
  const Vec2 hi(g.x0 + static_cast<double>(g.nx - 1) * g.dx, g.y0 + static_cast<double>(g.ny - 1) * g.dx);
  const double diam = (hi - lo).norm();

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_point = [&]() -> std::optional<Vec2> {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Vec2 p(lo.x() + unit(rng) * (hi.x() - lo.x()), lo.y() + unit(rng) * (hi.y() - lo.y()));
      if (f.interpolable(p)) return p;
    }
    return std::nullopt;
  };

  // Generation is sequential so the triple list depends only on the seed.
  std::vector<ZTriple> triples;
  triples.reserve(opts.triples);
  const double log_lo = std::log(0.25 * g.dx), log_hi = std::log(0.5 * diam);
  const std::size_t max_attempts = 50 * opts.triples + 1000;
  for (std::size_t attempt = 0; triples.size() < opts.triples && attempt < max_attempts; ++attempt) {
    const auto x = random_point();
    if (!x) break;
    ZTriple t;
    t.x = *x;
    if (unit(rng) < opts.local_fraction) {
      const double angle = 2.0 * std::numbers::pi * unit(rng);
      const double len = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
      t.y = t.x + len * Vec2(std::cos(angle), std::sin(angle));
    } else {
      const auto y = random_point();
      if (!y) break;
      t.y = *y;
    }
    t.r = unit(rng);
    if (!f.interpolable(t.y) || !f.interpolable(t.r * t.x + (1.0 - t.r) * t.y)) continue;
    triples.push_back(t);
  }

  ConcavityReport rep;
  rep.method = ConcavityMethod::korevaar_z;
  rep.kind = field.kind;
  rep.tolerance = tol;
  if (triples.empty()) {
    rep.verdict = Verdict::fail;
    rep.worst_value = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }

  std::vector<double> z(triples.size());
  parallel::for_each_index(triples.size(), [&](std::size_t k) {
    z[k] = concavity_function(field, triples[k].r, triples[k].x, triples[k].y);
  });

  std::vector<std::size_t> order(triples.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  const std::size_t keep = std::min(opts.refine, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) { return z[a] < z[b] || (z[a] == z[b] && a < b); });

  std::vector<ZTriple> refined(keep);
  std::vector<double> refined_z(keep);
  parallel::for_each_index(keep, [&](std::size_t c) {
    ZTriple best = triples[order[c]];
    double best_z = z[order[c]];
    double step_r = 0.05, step_x = g.dx;
    auto eval = [&](const ZTriple& t) -> std::optional<double> {
      if (!f.interpolable(t.x) || !f.interpolable(t.y) || !f.interpolable(t.r * t.x + (1.0 - t.r) * t.y)) {
        return std::nullopt;
      }
      return concavity_function(field, t.r, t.x, t.y);
    };
    for (int round = 0; round < 400 && step_x > g.dx / 256.0; ++round) {
      bool improved = false;
      for (int coord = 0; coord < 5; ++coord) {
        for (int sign = -1; sign <= 1; sign += 2) {
          ZTriple trial = best;
          switch (coord) {
            case 0:
              trial.r = std::clamp(trial.r + sign * step_r, 0.0, 1.0);
              break;
            case 1:
              trial.x.x() += sign * step_x;
              break;
            case 2:
              trial.x.y() += sign * step_x;
              break;
            case 3:
              trial.y.x() += sign * step_x;
              break;
            default:
              trial.y.y() += sign * step_x;
              break;
          }
          const auto v = eval(trial);
          if (v && *v < best_z) {
            best = trial;
            best_z = *v;
            improved = true;
          }
        }
      }
      if (!improved) {
        step_r *= 0.5;
        step_x *= 0.5;
      }
    }
    refined[c] = best;
    refined_z[c] = best_z;
  });

  rep.evaluated = triples.size();
  rep.worst_value = z[order[0]];
  rep.witness_triple = triples[order[0]];
  for (std::size_t c = 0; c < keep; ++c) {
    if (refined_z[c] < rep.worst_value) {
      rep.worst_value = refined_z[c];
      rep.witness_triple = refined[c];
    }
  }
  rep.verdict = rep.worst_value >= -tol ? Verdict::pass : Verdict::fail;
  return rep;
}

ConcavityReport ancient_proxy_check(const ArrivalField& field, double t_ref, double tol) {
  if (!(t_ref <= field.t0)) throw std::invalid_argument("ancient_proxy_check needs t_ref <= t0");
  const double c = field.alpha / (1.0 + field.alpha);
  const auto rows = sweep_rows(field, [&](std::size_t i, std::size_t j, double& extra) {
    const Derivatives d = field.derivatives(i, j);
    const double gap = field.u_at(i, j) - t_ref;
    const Mat2 m = d.hess - c * d.grad * d.grad.transpose() / gap;
    const double g = d.grad.norm();
    if (g > kGradientFloor) {
      const Vec2 n = d.grad / g;
      extra = -n.dot(m * n);
    }
    return max_eigenvalue(m);
  });
  const Reduced red = reduce_rows(field, rows);

  ConcavityReport rep;
  rep.method = ConcavityMethod::ancient_proxy;
  rep.kind = TransformKind::raw;
  rep.tolerance = tol;
  rep.evaluated = red.count;
  rep.worst_value = red.value;
  rep.witness_cell = red.where;
  rep.verdict = (red.count > 0 && red.value <= tol) ? Verdict::pass : Verdict::fail;
  rep.t_ref = t_ref;
  rep.normal_margin = red.count ? red.extra / static_cast<double>(red.count) : 0.0;
  return rep;
}

}  // namespace arrivallab
