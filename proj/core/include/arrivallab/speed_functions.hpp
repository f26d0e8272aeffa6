#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace arrivallab {

/// Eigenvalues at or below this value are treated as leaving the positive cone.
inline constexpr double kEigenvalueFloor = 1e-10;

enum class Verdict { pass, fail };

std::string_view to_string(Verdict verdict);

struct ClassificationFlags {
  std::optional<bool> monotone;
  std::optional<bool> inverse_concave;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// An isotropic speed f on the positive cone together with the exponent alpha.
/// The realized normal speed is F = f^alpha.
///
/// `eval` receives the principal curvatures (eigenvalues) and returns f without
/// any validation; use evaluate() for the checked path.
struct SpeedSpec {
  std::string name;
  int dimension = 1;
  double alpha = 1.0;
  /// Shape parameter passed to make_speed (p or q); 0 when unused.
  double parameter = 0.0;
  std::function<double(std::span<const double>)> eval;
  /// df/dkappa for dimension 1. Empty means "use finite differences".
  std::function<double(double)> scalar_derivative;
  /// True for built-ins known to be one-homogeneous (H, K^{1/n}, harmonic mean, ...).
  bool one_homogeneous = false;
  ClassificationFlags flags;
};

/// Built-in speeds: kappa, mean_curvature (H), gauss_curvature (K),
/// gauss_curvature_root (K^{1/n}), harmonic_mean, power_mean (p in [-1,1]),
/// lambda_min, neg_mean_curvature, kappa_power (sum of lambda^q).
/// `parameter` is p for power_mean and q for kappa_power.
SpeedSpec make_speed(std::string_view name, int dimension, double alpha, double parameter = 0.0);
std::vector<std::string> builtin_speed_names();

/// Checked evaluation of f on a symmetric matrix.
/// Throws NonPositiveCurvature if an eigenvalue is <= kEigenvalueFloor and
/// NonPositiveSpeed if f <= 0.
double evaluate(const SpeedSpec& spec, const Eigen::MatrixXd& r);
double evaluate_eigenvalues(const SpeedSpec& spec, std::span<const double> eigenvalues);

/// f_*(r) = 1 / f(r^{-1}).
double dual_evaluate(const SpeedSpec& spec, const Eigen::MatrixXd& r);
SpeedSpec dual(const SpeedSpec& spec);

/// Curve speeds (dimension 1): F(kappa) = f(kappa)^alpha and dF/dkappa.
double curve_speed(const SpeedSpec& spec, double kappa);
double curve_speed_derivative(const SpeedSpec& spec, double kappa);

struct ConeSegment {
  Eigen::MatrixXd r0;
  Eigen::MatrixXd r1;
  int samples = 9;
};

struct ClassificationWitness {
  std::string kind;         ///< "segment" or "perturbation"
  std::size_t index = 0;    ///< segment/sample index
  double lambda = 0.0;      ///< location along the segment
  double violation = 0.0;   ///< worst violation on this witness
  double midpoint_violation = 0.0;
  Eigen::MatrixXd a;        ///< r0, or the base point r
  Eigen::MatrixXd b;        ///< r1, or the perturbation s
};

struct ClassificationResult {
  Verdict verdict = Verdict::pass;
  std::optional<ClassificationWitness> witness;
  std::size_t samples = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  double worst_violation = 0.0;  ///< max violation seen (<= 0 means none)
};

void to_json(nlohmann::json& j, const ClassificationResult& result);

/// Seeded random segments between SPD matrices with eigenvalues in [0.1, 10].
std::vector<ConeSegment> random_segments(int dimension, std::size_t count, std::uint64_t seed,
                                         int samples_per_segment = 9);
/// Deterministic diagonal segments that swap/scale principal curvatures.
std::vector<ConeSegment> axis_segments(int dimension, int samples_per_segment = 9);

/// Concavity of f_* along every segment, up to `tol`.
/// Throws InvalidSegment if an endpoint is not in the positive cone.
ClassificationResult check_inverse_concavity(const SpeedSpec& spec, std::span<const ConeSegment> segments,
                                             double tol);

/// random_segments + axis_segments, then check_inverse_concavity.
ClassificationResult classify_inverse_concavity(const SpeedSpec& spec, std::size_t random_count,
                                                std::uint64_t seed, double tol);

/// Dimension-1 route: second differences of x -> 1/f(1/x) on a log-spaced grid.
ClassificationResult check_scalar_inverse_concavity(const SpeedSpec& spec, double tol,
                                                    std::size_t points = 400);

/// f(r + s) >= f(r) - tol for sampled r in the cone and PSD perturbations s.
ClassificationResult check_monotonicity(const SpeedSpec& spec, std::size_t samples, double tol,
                                        std::uint64_t seed = 0);

/// Strict monotonicity f'(kappa) > 0 on [kappa_lo, kappa_hi], dimension 1 only.
/// Curve flows need this for parabolicity.
bool is_strictly_monotone_curve_speed(const SpeedSpec& spec, double kappa_lo = 1e-3,
                                      double kappa_hi = 1e4, std::size_t points = 200);

/// Relative symmetry defect under eigenvalue permutations, max over samples.
double symmetry_defect(const SpeedSpec& spec, std::size_t samples, std::uint64_t seed);
/// Relative defect of f(c r) = c f(r), max over samples.
double homogeneity_defect(const SpeedSpec& spec, std::size_t samples, std::uint64_t seed);

/// Closed-form sphere solutions for one-homogeneous speeds in any dimension:
/// an n-sphere of radius r0 moving by F = f^alpha has
/// r(t)^{1+alpha} = r0^{1+alpha} - (1+alpha) f(I)^alpha (t - t0).
double sphere_radius(const SpeedSpec& spec, double r0, double elapsed);
double sphere_extinction_time(const SpeedSpec& spec, double r0);
double sphere_arrival_time(const SpeedSpec& spec, double r0, double distance_from_center);

}  // namespace arrivallab
