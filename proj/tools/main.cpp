#include "arrivallab/arrival_time.hpp"
#include "arrivallab/errors.hpp"
#include "arrivallab/experiment.hpp"
#include "arrivallab/flow_solver.hpp"
#include "arrivallab/parallel.hpp"
#include "arrivallab/serialization.hpp"
#include "arrivallab/speed_functions.hpp"
#include "arrivallab/svg.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ansicolor_sink.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>
#include <optional>
#include <string>

namespace al = arrivallab;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;

struct CommonArgs {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--preset", args.preset, "Built-in scenario instead of --config");
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--jobs", args.jobs, "Worker thread cap (0 = all cores)");
  cmd->add_option("--out", args.out, "Output directory (overrides output_dir)");
}

al::ExperimentConfig resolve(const CommonArgs& args) {
  al::ExperimentConfig c;
  if (!args.config.empty() && !args.preset.empty()) throw al::ConfigError("use either --config or --preset");
  if (!args.config.empty()) {
    c = al::load_config(args.config);
  } else if (!args.preset.empty()) {
    c = al::preset(args.preset);
  } else {
    throw al::ConfigError("one of --config or --preset is required");
  }
  if (args.seed) c.seed = *args.seed;
  if (!args.out.empty()) c.output_dir = args.out;
  al::parallel::set_max_jobs(args.jobs);
  return c;
}

void setup_logging() {
  auto logger = std::make_shared<spdlog::logger>("arrivallab", std::make_shared<spdlog::sinks::ansicolor_stderr_sink_mt>());
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ARRIVALLAB_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

al::FlowTrajectory run_flow(const al::ExperimentConfig& c) {
  return al::run(al::build_curve(c), al::build_speed(c), c.t0, c.flow);
}

int cmd_flow(const CommonArgs& args) {
  const auto c = resolve(args);
  const auto traj = run_flow(c);
  al::io::write_trajectory(traj, c.output_dir / "trajectory");
  al::svg::write_curves(traj, 12, c.output_dir / "curves.svg");
  fmt::print("status {}  T_ext {:.10g}  p_ext ({:.6g}, {:.6g})  steps {}  snapshots {}\n", al::to_string(traj.status),
             traj.T_ext, traj.p_ext.x(), traj.p_ext.y(), traj.steps, traj.snapshots.size());
  return traj.status == al::FlowStatus::completed ? 0 : 1;
}

int cmd_arrival(const CommonArgs& args) {
  const auto c = resolve(args);
  const auto traj = run_flow(c);
  if (traj.status != al::FlowStatus::completed) {
    fmt::print(stderr, "flow did not complete: {}\n", traj.diagnostic);
    return 1;
  }
  const auto field = al::reconstruct(traj, al::build_grid_spec(c));
  al::io::write_field(field, c.output_dir / "field.csv");
  fmt::print("grid {} x {}  dx {:.6g}  T_ext {:.10g}  r_excl {:.4g}  -> {}\n", field.grid.nx, field.grid.ny,
             field.grid.dx, field.T_ext, field.r_excl, (c.output_dir / "field.csv").string());
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  const auto c = resolve(args);
  const auto result = al::run_experiment(c);
  for (const auto& ch : result.checks) fmt::print("{:<18} {}\n", ch.name, ch.verdict == al::Verdict::pass ? "PASS" : "FAIL");
  fmt::print("report: {}\n", (c.output_dir / "report.json").string());
  return result.exit_code;
}

int cmd_classify(const std::string& name, int dimension, double alpha, double parameter, std::size_t segments,
                 std::uint64_t seed, double tol, int jobs) {
  al::parallel::set_max_jobs(jobs);
  al::SpeedSpec spec;
  try {
    spec = al::make_speed(name, dimension, alpha, parameter);
  } catch (const std::exception& e) {
    throw al::ConfigError(e.what());
  }
  const auto inverse = dimension == 1 ? al::check_scalar_inverse_concavity(spec, tol)
                                      : al::classify_inverse_concavity(spec, segments, seed, tol);
  const auto mono = al::check_monotonicity(spec, segments, tol, seed);
  nlohmann::json doc = {{"speed", name},
                        {"dimension", dimension},
                        {"inverse_concavity", inverse},
                        {"monotonicity", mono}};
  fmt::print("{}\n", doc.dump(2));
  return inverse.verdict == al::Verdict::pass && mono.verdict == al::Verdict::pass ? 0 : 1;
}

int cmd_converge(const CommonArgs& args, int levels) {
  const auto c = resolve(args);
  const auto table = al::convergence_study(c, levels);
  const auto doc = al::to_json_table(table);
  al::io::write_json(doc, c.output_dir / "convergence.json");
  fmt::print("{:>6} {:>10} {:>12} {:>12} {:>12} {:>12} {:>12}\n", "N", "dx", "worst_Z", "worst_hess", "worst_Q",
             "residual", "grad_err");
  for (const auto& r : table.rows) {
    fmt::print("{:>6} {:>10.3g} {:>12.4g} {:>12.4g} {:>12.4g} {:>12.4g} {:>12.4g}\n", r.theta_count, r.dx, r.worst_z,
               r.worst_hessian, r.worst_q, r.max_residual, r.max_gradient_error);
  }
  for (std::size_t k = 0; k < table.residual_orders.size(); ++k) {
    fmt::print("order {}->{}: residual {:.3f}  gradient {:.3f}\n", k, k + 1, table.residual_orders[k],
               table.gradient_orders[k]);
  }
  return 0;
}

int cmd_report(const std::string& path) {
  fs::path p = path;
  if (fs::is_directory(p)) p /= "report.json";
  const auto doc = al::io::read_json(p);
  fmt::print("{} (schema {})\n", doc.at("config").at("name").get<std::string>(), doc.at("schema_version").get<int>());
  for (const auto& [name, entry] : doc.at("checks").items()) {
    fmt::print("{:<18} {}\n", name, entry.at("verdict").get<std::string>());
  }
  return doc.at("exit_code").get<int>();
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Arrival-time reconstruction and concavity verification for contracting curve flows"};
  app.require_subcommand(1);

  CommonArgs flow_args, arrival_args, verify_args, converge_args;
  auto* flow = app.add_subcommand("flow", "Run the curve flow and write the trajectory");
  add_common(flow, flow_args);
  auto* arrival = app.add_subcommand("arrival", "Run the flow and reconstruct the arrival time on a grid");
  add_common(arrival, arrival_args);
  auto* verify = app.add_subcommand("verify", "Run every configured check and write report.json");
  add_common(verify, verify_args);

  auto* converge = app.add_subcommand("converge", "Repeat the scenario at doubled resolutions");
  add_common(converge, converge_args);
  int levels = 3;
  converge->add_option("--levels", levels, "Number of resolution levels (>= 2)");

  auto* classify = app.add_subcommand("classify-speed", "Test a speed for inverse concavity and monotonicity");
  std::string speed_name;
  int dimension = 2, classify_jobs = 0;
  double alpha = 1.0, parameter = 0.0, tol = 1e-9;
  std::size_t segments = 10'000;
  std::uint64_t seed = 1;
  classify->add_option("speed", speed_name, "Speed name")->required();
  classify->add_option("--dimension", dimension, "Matrix dimension");
  classify->add_option("--alpha", alpha, "Exponent alpha");
  classify->add_option("--parameter", parameter, "Shape parameter (p or q)");
  classify->add_option("--segments", segments, "Random cone segments");
  classify->add_option("--tol", tol, "Concavity tolerance");
  classify->add_option("--seed", seed, "Segment seed");
  classify->add_option("--jobs", classify_jobs, "Worker thread cap (0 = all cores)");

  auto* report = app.add_subcommand("report", "Summarize an existing report.json");
  std::string report_path;
  report->add_option("path", report_path, "report.json or its directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*flow) return cmd_flow(flow_args);
    if (*arrival) return cmd_arrival(arrival_args);
    if (*verify) return cmd_verify(verify_args);
    if (*converge) return cmd_converge(converge_args, levels);
    if (*classify) return cmd_classify(speed_name, dimension, alpha, parameter, segments, seed, tol, classify_jobs);
    if (*report) return cmd_report(report_path);
  } catch (const al::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return kExitUsage;
}
