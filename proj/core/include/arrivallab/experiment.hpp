#pragma once

#include "arrivallab/arrival_time.hpp"
#include "arrivallab/flow_solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arrivallab {

struct CurveConfig {
  /// circle, ellipse or fourier.
  std::string kind = "circle";
  double radius = 1.0;
  double a = 2.0;
  double b = 1.0;
  double rotation = 0.0;
  Vec2 center = Vec2::Zero();
  /// fourier: h = a0 + sum cos_coeffs[k-1] cos(k theta) + sin_coeffs[k-1] sin(k theta).
  double a0 = 1.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;
};

struct SpeedConfig {
  std::string name = "kappa";
  double alpha = 1.0;
  double parameter = 0.0;
  /// Only the inverse_concavity check uses dimensions above 1.
  int dimension = 1;
};

struct GridConfig {
  std::size_t theta_count = 256;
  /// 0 selects `dx`.
  std::size_t grid_nx = 0;
  double dx = 1.0 / 128.0;
  int stencil_order = 4;
  Interpolation interpolation = Interpolation::cubic;
  double r_excl = 0.0;
};

struct ToleranceConfig {
  double extinction = 1e-5;
  double arrival = 1e-4;
  double gradient = 5e-2;
  double residual = 1e-5;
  double hessian = 1e-3;
  double z = 1e-4;
  double harnack = 1e-3;
  double equivalence = 5e-2;
  double classifier = 1e-9;
};

struct SamplingConfig {
  std::size_t z_triples = 100'000;
  std::size_t z_refine = 32;
  std::size_t gradient_samples = 400;
  std::size_t equivalence_samples = 400;
  std::size_t classifier_segments = 10'000;
};

inline const std::vector<std::string> kAllChecks = {
    "flow",        "arrival",           "residual",      "concavity_hessian", "concavity_z",
    "harnack",     "equivalence",       "inverse_concavity", "log_concavity", "ancient_proxy"};

struct ExperimentConfig {
  std::string name = "custom";
  CurveConfig initial_curve;
  SpeedConfig speed;
  GridConfig grids;
  ToleranceConfig tolerances;
  SamplingConfig sampling;
  FlowOptions flow;
  double t0 = 0.0;
  std::vector<std::string> checks = kAllChecks;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "arrivallab_out";
};

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
ExperimentConfig preset(std::string_view name);

/// Parses a config document. An optional "preset" key selects the base
/// values; every other key overrides them. Unknown keys, unknown checks and
/// wrongly typed values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

SupportCurve build_curve(const ExperimentConfig& config);
SpeedSpec build_speed(const ExperimentConfig& config);
GridSpec build_grid_spec(const ExperimentConfig& config);

/// Closed-form arrival time when the scenario is a circle moved by a
/// one-homogeneous speed.
std::optional<double> exact_extinction_time(const ExperimentConfig& config);

struct CheckOutcome {
  std::string name;
  Verdict verdict = Verdict::pass;
  nlohmann::json details;
};

struct ExperimentResult {
  std::vector<CheckOutcome> checks;
  nlohmann::json report;
  /// 0 when every requested check passed, 1 otherwise.
  int exit_code = 0;
};

/// Runs the requested checks (flow, then reconstruction, then verifiers) and
/// writes report.json plus CSV/SVG artifacts into output_dir unless
/// write_outputs is false. Numerical failures become FAIL outcomes with a
/// diagnostic rather than exceptions.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs = true);

struct ConvergenceRow {
  std::size_t theta_count = 0;
  std::size_t grid_nx = 0;
  double dx = 0.0;
  double worst_z = 0.0;
  double worst_hessian = 0.0;
  double worst_q = 0.0;
  double max_residual = 0.0;
  double max_gradient_error = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  /// log2(e_k / e_{k+1}) for consecutive rows.
  std::vector<double> residual_orders;
  std::vector<double> gradient_orders;
};

/// Level k doubles theta_count and halves dx (or doubles grid_nx) relative to
/// the config. Throws ConfigError when levels < 2.
ConvergenceTable convergence_study(const ExperimentConfig& config, int levels);
nlohmann::json to_json_table(const ConvergenceTable& table);

}  // namespace arrivallab
