#include "arrivallab/speed_functions.hpp"

#include "arrivallab/errors.hpp"
#include "arrivallab/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace arrivallab {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<double> eigenvalues_of(const MatrixXd& r) {
  if (r.rows() != r.cols() || r.rows() == 0) throw std::invalid_argument("speed argument must be square");
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(r, Eigen::EigenvaluesOnly);
  const VectorXd& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

void require_cone(std::span<const double> eigenvalues) {
  for (double l : eigenvalues) {
    if (!(l > kEigenvalueFloor)) {
      std::ostringstream msg;
      msg << "principal curvature " << l << " is outside the positive cone";
      throw NonPositiveCurvature(msg.str());
    }
  }
}

void require_dimension(const SpeedSpec& spec, std::size_t n) {
  if (static_cast<int>(n) != spec.dimension) {
    throw std::invalid_argument("speed '" + spec.name + "' expects dimension " +
                                std::to_string(spec.dimension) + ", got " + std::to_string(n));
  }
}

MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> log_ev(std::log(0.1), std::log(10.0));
  MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(g).householderQ();
  VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = std::exp(log_ev(rng));
  MatrixXd r = q * d.asDiagonal() * q.transpose();
  return 0.5 * (r + r.transpose());
}

MatrixXd random_psd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.0, 2.0);
  MatrixXd s = MatrixXd::Zero(n, n);
  // Sum of a random number of rank-one terms, so degenerate directions are hit too.
  std::uniform_int_distribution<int> rank(1, n);
  const int k = rank(rng);
  for (int i = 0; i < k; ++i) {
    VectorXd v(n);
    for (int j = 0; j < n; ++j) v(j) = gauss(rng);
    s += scale(rng) * v * v.transpose();
  }
  return s;
}

double raw_dual(const SpeedSpec& spec, const MatrixXd& r) {
  auto ev = eigenvalues_of(r);
  for (double& l : ev) l = 1.0 / l;
  return 1.0 / spec.eval(ev);
}

bool in_cone(const MatrixXd& r) {
  const auto ev = eigenvalues_of(r);
  return std::all_of(ev.begin(), ev.end(), [](double l) { return l > kEigenvalueFloor; });
}

}  // namespace

std::string_view to_string(Verdict verdict) { return verdict == Verdict::pass ? "PASS" : "FAIL"; }

std::vector<std::string> builtin_speed_names() {
  return {"kappa",          "mean_curvature", "gauss_curvature",    "gauss_curvature_root",
          "harmonic_mean",  "power_mean",     "lambda_min",         "neg_mean_curvature",
          "kappa_power"};
}

SpeedSpec make_speed(std::string_view name, int dimension, double alpha, double parameter) {
  if (dimension < 1) throw std::invalid_argument("speed dimension must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("speed exponent alpha must be positive");

  SpeedSpec spec;
  spec.dimension = dimension;
  spec.alpha = alpha;
  const double n = static_cast<double>(dimension);

  if (name == "kappa") {
    if (dimension != 1) throw std::invalid_argument("kappa is the curve speed; dimension must be 1");
    spec.name = "kappa";
    spec.eval = [](std::span<const double> l) { return l[0]; };
    spec.scalar_derivative = [](double) { return 1.0; };
    spec.one_homogeneous = true;
  } else if (name == "mean_curvature" || name == "H") {
    spec.name = "mean_curvature";
    spec.eval = [](std::span<const double> l) { return std::accumulate(l.begin(), l.end(), 0.0); };
    spec.scalar_derivative = [](double) { return 1.0; };
    spec.one_homogeneous = true;
  } else if (name == "gauss_curvature" || name == "K") {
    spec.name = "gauss_curvature";
    spec.eval = [](std::span<const double> l) {
      return std::accumulate(l.begin(), l.end(), 1.0, std::multiplies<>());
    };
    spec.scalar_derivative = [](double) { return 1.0; };
    spec.one_homogeneous = dimension == 1;
  } else if (name == "gauss_curvature_root" || name == "K_root") {
    spec.name = "gauss_curvature_root";
    spec.eval = [n](std::span<const double> l) {
      double log_sum = 0.0;
      for (double x : l) log_sum += std::log(x);
      return std::exp(log_sum / n);
    };
    spec.scalar_derivative = [](double) { return 1.0; };
    spec.one_homogeneous = true;
  } else if (name == "harmonic_mean") {
    spec.name = "harmonic_mean";
    spec.eval = [](std::span<const double> l) {
      double s = 0.0;
      for (double x : l) s += 1.0 / x;
      return 1.0 / s;
    };
    spec.scalar_derivative = [](double) { return 1.0; };
    spec.one_homogeneous = true;
  } else if (name == "power_mean") {
    if (parameter < -1.0 || parameter > 1.0) throw std::invalid_argument("power_mean needs p in [-1, 1]");
    spec.name = "power_mean";
    const double p = parameter;
    spec.eval = [p, n](std::span<const double> l) {
      if (p == 0.0) {
        double log_sum = 0.0;
        for (double x : l) log_sum += std::log(x);
        return std::exp(log_sum / n);
      }
      double s = 0.0;
      for (double x : l) s += std::pow(x, p);
      return std::pow(s / n, 1.0 / p);
    };
    spec.scalar_derivative = [](double) { return 1.0; };
    spec.one_homogeneous = true;
  } else if (name == "lambda_min") {
    spec.name = "lambda_min";
    spec.eval = [](std::span<const double> l) { return *std::min_element(l.begin(), l.end()); };
    spec.scalar_derivative = [](double) { return 1.0; };
    spec.one_homogeneous = true;
  } else if (name == "neg_mean_curvature" || name == "neg_H") {
    spec.name = "neg_mean_curvature";
    spec.eval = [](std::span<const double> l) { return -std::accumulate(l.begin(), l.end(), 0.0); };
    spec.scalar_derivative = [](double) { return -1.0; };
  } else if (name == "kappa_power") {
    if (!(parameter > 0.0)) throw std::invalid_argument("kappa_power needs q > 0");
    spec.name = "kappa_power";
    const double q = parameter;
    spec.eval = [q](std::span<const double> l) {
      double s = 0.0;
      for (double x : l) s += std::pow(x, q);
      return s;
    };
    spec.scalar_derivative = [q](double k) { return q * std::pow(k, q - 1.0); };
    spec.one_homogeneous = q == 1.0;
  } else {
    throw std::invalid_argument("unknown speed: " + std::string(name));
  }
  spec.parameter = parameter;
  return spec;
}

double evaluate_eigenvalues(const SpeedSpec& spec, std::span<const double> eigenvalues) {
  require_dimension(spec, eigenvalues.size());
  require_cone(eigenvalues);
  const double f = spec.eval(eigenvalues);
  if (!(f > 0.0)) {
    throw NonPositiveSpeed("speed '" + spec.name + "' is not positive on the cone (f = " +
                           std::to_string(f) + ")");
  }
  return f;
}

double evaluate(const SpeedSpec& spec, const MatrixXd& r) {
  const auto ev = eigenvalues_of(r);
  return evaluate_eigenvalues(spec, ev);
}

double dual_evaluate(const SpeedSpec& spec, const MatrixXd& r) {
  auto ev = eigenvalues_of(r);
  require_dimension(spec, ev.size());
  require_cone(ev);
  for (double& l : ev) l = 1.0 / l;
  return 1.0 / evaluate_eigenvalues(spec, ev);
}

SpeedSpec dual(const SpeedSpec& spec) {
  SpeedSpec d;
  d.name = spec.name + "_dual";
  d.dimension = spec.dimension;
  d.alpha = spec.alpha;
  d.one_homogeneous = spec.one_homogeneous;
  d.eval = [f = spec.eval](std::span<const double> l) {
    std::vector<double> inv(l.begin(), l.end());
    for (double& x : inv) x = 1.0 / x;
    return 1.0 / f(inv);
  };
  return d;
}

double curve_speed(const SpeedSpec& spec, double kappa) {
  const double l[1] = {kappa};
  const double f = evaluate_eigenvalues(spec, l);
  return spec.alpha == 1.0 ? f : std::pow(f, spec.alpha);
}

double curve_speed_derivative(const SpeedSpec& spec, double kappa) {
  const double l[1] = {kappa};
  const double f = evaluate_eigenvalues(spec, l);
  double df = 0.0;
  if (spec.scalar_derivative) {
    df = spec.scalar_derivative(kappa);
  } else {
    // 4th-order central difference with a relative step.
    const double h = 1e-3 * kappa;
    auto g = [&](double k) {
      const double x[1] = {k};
      return spec.eval(x);
    };
    df = (g(kappa - 2 * h) - 8 * g(kappa - h) + 8 * g(kappa + h) - g(kappa + 2 * h)) / (12 * h);
  }
  if (spec.alpha == 1.0) return df;
  return spec.alpha * std::pow(f, spec.alpha - 1.0) * df;
}

void to_json(nlohmann::json& j, const ClassificationResult& result) {
  j = nlohmann::json{{"verdict", to_string(result.verdict)},
                     {"samples", result.samples},
                     {"tol", result.tol},
                     {"seed", result.seed},
                     {"worst_violation", result.worst_violation}};
  if (result.witness) {
    const auto& w = *result.witness;
    auto mat = [](const MatrixXd& m) {
      nlohmann::json rows = nlohmann::json::array();
      for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
      }
      return rows;
    };
    j["witness"] = {{"kind", w.kind},
                    {"index", w.index},
                    {"lambda", w.lambda},
                    {"violation", w.violation},
                    {"midpoint_violation", w.midpoint_violation},
                    {"a", mat(w.a)},
                    {"b", mat(w.b)}};
  } else {
    j["witness"] = nullptr;
  }
}

std::vector<ConeSegment> random_segments(int dimension, std::size_t count, std::uint64_t seed,
                                         int samples_per_segment) {
  std::mt19937_64 rng(seed);
  std::vector<ConeSegment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ConeSegment s;
    s.r0 = random_spd(dimension, rng);
    s.r1 = random_spd(dimension, rng);
    s.samples = samples_per_segment;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ConeSegment> axis_segments(int dimension, int samples_per_segment) {
  std::vector<ConeSegment> out;
  const int n = dimension;
  auto diag = [n](const std::vector<double>& d) {
    MatrixXd m = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
    return m;
  };
  if (n == 1) {
    out.push_back({diag({0.2}), diag({5.0}), samples_per_segment});
    out.push_back({diag({0.05}), diag({20.0}), samples_per_segment});
    out.push_back({diag({1.0}), diag({2.0}), samples_per_segment});
    return out;
  }
  for (double a : {0.25, 4.0}) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        std::vector<double> d0(static_cast<std::size_t>(n), 1.0), d1(static_cast<std::size_t>(n), 1.0);
        d0[static_cast<std::size_t>(i)] = a;
        d1[static_cast<std::size_t>(j)] = a;
        out.push_back({diag(d0), diag(d1), samples_per_segment});
      }
    }
  }
  std::vector<double> up(static_cast<std::size_t>(n)), down(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    up[static_cast<std::size_t>(i)] = 1.0 + i;
    down[static_cast<std::size_t>(i)] = static_cast<double>(n - i);
  }
  out.push_back({diag(up), diag(down), samples_per_segment});
  out.push_back({diag(up), 3.0 * diag(up), samples_per_segment});
  return out;
}

ClassificationResult check_inverse_concavity(const SpeedSpec& spec, std::span<const ConeSegment> segments,
                                             double tol) {
  if (segments.empty()) throw std::invalid_argument("inverse-concavity check needs at least one segment");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.r0.rows() != spec.dimension || s.r1.rows() != spec.dimension || s.samples < 1 ||
        !in_cone(s.r0) || !in_cone(s.r1)) {
      throw InvalidSegment("segment " + std::to_string(i) + " leaves the positive cone or has wrong size");
    }
  }

  struct SegmentOutcome {
    double worst = -std::numeric_limits<double>::infinity();
    double lambda = 0.0;
    double midpoint = 0.0;
  };
  std::vector<SegmentOutcome> outcomes(segments.size());

  parallel::for_each_index(segments.size(), [&](std::size_t i) {
    const auto& s = segments[i];
    const double f0 = raw_dual(spec, s.r0);
    const double f1 = raw_dual(spec, s.r1);
    auto violation_at = [&](double lam) {
      const MatrixXd r = lam * s.r0 + (1.0 - lam) * s.r1;
      return lam * f0 + (1.0 - lam) * f1 - raw_dual(spec, r);
    };
    SegmentOutcome out;
    for (int k = 1; k <= s.samples; ++k) {
      const double lam = static_cast<double>(k) / (s.samples + 1);
      const double v = violation_at(lam);
      if (v > out.worst) {
        out.worst = v;
        out.lambda = lam;
      }
    }
    out.midpoint = violation_at(0.5);
    outcomes[i] = out;
  });

  ClassificationResult result;
  result.tol = tol;
  result.worst_violation = -std::numeric_limits<double>::infinity();
  std::size_t worst_index = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    result.samples += static_cast<std::size_t>(segments[i].samples);
    if (outcomes[i].worst > result.worst_violation) {
      result.worst_violation = outcomes[i].worst;
      worst_index = i;
    }
  }
  if (result.worst_violation > tol) {
    result.verdict = Verdict::fail;
    const auto& o = outcomes[worst_index];
    result.witness = ClassificationWitness{"segment",         worst_index,
                                           o.lambda,          o.worst,
                                           o.midpoint,        segments[worst_index].r0,
                                           segments[worst_index].r1};
  }
  return result;
}

ClassificationResult classify_inverse_concavity(const SpeedSpec& spec, std::size_t random_count,
                                                std::uint64_t seed, double tol) {
  auto segments = axis_segments(spec.dimension);
  auto random = random_segments(spec.dimension, random_count, seed);
  segments.insert(segments.end(), random.begin(), random.end());
  auto result = check_inverse_concavity(spec, segments, tol);
  result.seed = seed;
  return result;
}

ClassificationResult check_scalar_inverse_concavity(const SpeedSpec& spec, double tol, std::size_t points) {
  if (spec.dimension != 1) throw std::invalid_argument("scalar inverse-concavity test needs dimension 1");
  if (points < 3) throw std::invalid_argument("scalar test needs at least 3 points");
  auto g = [&](double x) {
    const double l[1] = {1.0 / x};
    return 1.0 / spec.eval(l);
  };
  // Same range as the segment test: x in [0.05, 20].
  const double lo = std::log(0.05), hi = std::log(20.0);
  ClassificationResult result;
  result.tol = tol;
  result.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < points; ++i) {
    const double x = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    const double h = 0.05 * x;
    // Midpoint-concavity defect on the symmetric chord [x-h, x+h].
    const double v = 0.5 * (g(x - h) + g(x + h)) - g(x);
    ++result.samples;
    if (v > result.worst_violation) {
      result.worst_violation = v;
      if (v > tol) {
        result.witness = ClassificationWitness{"second_difference", i, 0.5, v, v,
                                               MatrixXd::Constant(1, 1, x - h),
                                               MatrixXd::Constant(1, 1, x + h)};
      }
    }
  }
  result.verdict = result.worst_violation > tol ? Verdict::fail : Verdict::pass;
  if (result.verdict == Verdict::pass) result.witness.reset();
  return result;
}

ClassificationResult check_monotonicity(const SpeedSpec& spec, std::size_t samples, double tol,
                                        std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("monotonicity check needs samples >= 1");
  std::mt19937_64 rng(seed);
  std::vector<MatrixXd> base(samples), pert(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    base[i] = random_spd(spec.dimension, rng);
    pert[i] = random_psd(spec.dimension, rng);
  }
  std::vector<double> violation(samples);
  parallel::for_each_index(samples, [&](std::size_t i) {
    const auto ev_r = eigenvalues_of(base[i]);
    const auto ev_rs = eigenvalues_of(base[i] + pert[i]);
    violation[i] = spec.eval(ev_r) - spec.eval(ev_rs);
  });

  ClassificationResult result;
  result.tol = tol;
  result.seed = seed;
  result.samples = samples;
  result.worst_violation = -std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    if (violation[i] > result.worst_violation) {
      result.worst_violation = violation[i];
      worst = i;
    }
  }
  if (result.worst_violation > tol) {
    result.verdict = Verdict::fail;
    result.witness = ClassificationWitness{"perturbation", worst, 0.0, violation[worst], 0.0, base[worst],
                                           pert[worst]};
  }
  return result;
}

bool is_strictly_monotone_curve_speed(const SpeedSpec& spec, double kappa_lo, double kappa_hi,
                                      std::size_t points) {
  if (spec.dimension != 1) return false;
  const double lo = std::log(kappa_lo), hi = std::log(kappa_hi);
  for (std::size_t i = 0; i < points; ++i) {
    const double k = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    const double l[1] = {k};
    if (!(spec.eval(l) > 0.0)) return false;
    if (!(curve_speed_derivative(spec, k) > 0.0)) return false;
  }
  return true;
}

double symmetry_defect(const SpeedSpec& spec, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_ev(std::log(0.1), std::log(10.0));
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> l(static_cast<std::size_t>(spec.dimension));
    for (double& x : l) x = std::exp(log_ev(rng));
    const double ref = spec.eval(l);
    std::sort(l.begin(), l.end());
    do {
      worst = std::max(worst, std::abs(spec.eval(l) - ref) / std::max(std::abs(ref), 1e-300));
    } while (std::next_permutation(l.begin(), l.end()));
  }
  return worst;
}

double homogeneity_defect(const SpeedSpec& spec, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_c(std::log(0.01), std::log(100.0));
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const MatrixXd r = random_spd(spec.dimension, rng);
    const double c = std::exp(log_c(rng));
    const double lhs = evaluate(spec, c * r);
    const double rhs = c * evaluate(spec, r);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
  }
  return worst;
}

namespace {
double unit_sphere_speed(const SpeedSpec& spec) {
  if (!spec.one_homogeneous) {
    throw std::invalid_argument("sphere oracle needs a one-homogeneous speed, got '" + spec.name + "'");
  }
  const std::vector<double> ones(static_cast<std::size_t>(spec.dimension), 1.0);
  return std::pow(evaluate_eigenvalues(spec, ones), spec.alpha);
}
}  // namespace

double sphere_radius(const SpeedSpec& spec, double r0, double elapsed) {
  const double a = spec.alpha;
  const double base = std::pow(r0, 1.0 + a) - (1.0 + a) * unit_sphere_speed(spec) * elapsed;
  return base > 0.0 ? std::pow(base, 1.0 / (1.0 + a)) : 0.0;
}

double sphere_extinction_time(const SpeedSpec& spec, double r0) {
  const double a = spec.alpha;
  return std::pow(r0, 1.0 + a) / ((1.0 + a) * unit_sphere_speed(spec));
}

double sphere_arrival_time(const SpeedSpec& spec, double r0, double distance_from_center) {
  const double a = spec.alpha;
  return (std::pow(r0, 1.0 + a) - std::pow(distance_from_center, 1.0 + a)) /
         ((1.0 + a) * unit_sphere_speed(spec));
}

}  // namespace arrivallab
