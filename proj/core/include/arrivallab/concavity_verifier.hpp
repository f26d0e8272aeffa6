#pragma once

#include "arrivallab/arrival_time.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace arrivallab {

enum class ConcavityMethod { hessian, korevaar_z, ancient_proxy };
std::string_view to_string(ConcavityMethod method);

struct ZTriple {
  double r = 0.0;
  Vec2 x = Vec2::Zero();
  Vec2 y = Vec2::Zero();
};

/// Hessian and ancient-proxy reports pass when worst_value <= tolerance;
/// Z reports pass when worst_value >= -tolerance.
struct ConcavityReport {
  ConcavityMethod method = ConcavityMethod::hessian;
  TransformKind kind = TransformKind::sqrt_power;
  double worst_value = 0.0;
  Verdict verdict = Verdict::pass;
  double tolerance = 0.0;
  Vec2 witness_cell = Vec2::Zero();
  std::optional<ZTriple> witness_triple;
  std::size_t evaluated = 0;
  /// (grid spacing, worst_value) pairs filled in by refinement studies.
  std::vector<std::pair<double, double>> refinement_trend;

  /// hessian: the same maximum taken from FD applied directly to the
  /// transformed values (a diagnostic; the verdict uses the chain rule).
  std::optional<double> direct_worst_value;
  /// ancient_proxy: reference time and the mean of -n^T M n over cells,
  /// n = Du / |Du|.
  std::optional<double> t_ref;
  std::optional<double> normal_margin;
};
void to_json(nlohmann::json& j, const ConcavityReport& report);

double max_eigenvalue(const Mat2& m);

/// Largest eigenvalue of D^2w over hessian_valid cells.
ConcavityReport hessian_concavity(const TransformedField& field, double tol);

/// Z(r, x, y) = w(rx + (1-r)y) - r w(x) - (1-r) w(y) with w from the interpolated u.
/// MaskedPoint if any of the three points is not interpolable.
double concavity_function(const TransformedField& field, double r, const Vec2& x, const Vec2& y);

struct ZSearchOptions {
  std::size_t triples = 100'000;
  /// Best candidates refined by coordinate descent.
  std::size_t refine = 32;
  std::uint64_t seed = 1;
  /// Share of triples with y drawn near x (log-uniform distance).
  double local_fraction = 0.5;
};

/// Seeded random triples, then coordinate descent on the best few.
ConcavityReport korevaar_z_search(const TransformedField& field, const ZSearchOptions& opts, double tol);

/// Largest eigenvalue of D^2u - (alpha/(1+alpha)) Du (x) Du / (u - t_ref) over
/// hessian_valid cells. Requires t_ref <= t0. Lowering t_ref shrinks the
/// subtracted term, so worst_value cannot decrease.
ConcavityReport ancient_proxy_check(const ArrivalField& field, double t_ref, double tol);

}  // namespace arrivallab
