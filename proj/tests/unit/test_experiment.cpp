#include "arrivallab/errors.hpp"
#include "arrivallab/experiment.hpp"
#include "arrivallab/serialization.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>

using namespace arrivallab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("arrivallab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_circle() {
  auto c = preset("circle_mcf");
  c.grids.theta_count = 64;
  c.grids.dx = 1.0 / 64.0;
  c.sampling.z_triples = 2'000;
  c.sampling.gradient_samples = 50;
  c.sampling.equivalence_samples = 50;
  c.tolerances.gradient = 2e-2;
  c.tolerances.equivalence = 5e-2;
  return c;
}

nlohmann::json without_timing(nlohmann::json report) {
  report.erase("timing_seconds");
  return report;
}

}  // namespace

TEST(Config, PresetsParseAndRoundTrip) {
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    const auto again = parse_config(config_to_json(c));
    EXPECT_EQ(config_to_json(again), config_to_json(c)) << name;
  }
  EXPECT_THROW(preset("nope"), ConfigError);
}

TEST(Config, PresetKeyWithOverrides) {
  const auto c = parse_config({{"preset", "ellipse_mcf"}, {"speed", {{"alpha", 2.0}}}, {"seed", 9}});
  EXPECT_EQ(c.initial_curve.kind, "ellipse");
  EXPECT_EQ(c.speed.alpha, 2.0);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, RejectsUnknownKeysAndChecks) {
  EXPECT_THROW(parse_config({{"speed", {{"alpha_", 1.0}}}}), ConfigError);
  EXPECT_THROW(parse_config({{"bogus", 1}}), ConfigError);
  EXPECT_THROW(parse_config({{"checks", {"flow", "vibes"}}}), ConfigError);
  EXPECT_THROW(parse_config({{"speed", {{"alpha", "one"}}}}), ConfigError);
  EXPECT_THROW(parse_config({{"speed", {{"alpha", -1.0}}}}), ConfigError);
  EXPECT_THROW(parse_config({{"speed", {{"name", "no_such_speed"}}}}), ConfigError);
  EXPECT_THROW(parse_config({{"grids", {{"stencil_order", 3}}}}), ConfigError);
}

TEST(Config, ExactExtinctionOnlyForCircles) {
  EXPECT_NEAR(*exact_extinction_time(preset("circle_mcf")), 0.5, 1e-15);
  EXPECT_FALSE(exact_extinction_time(preset("ellipse_mcf")).has_value());
}

TEST(Serialization, TrajectoryRoundTripIsExact) {
  const auto dir = scratch("traj");
  const auto traj = run(SupportCurve::ellipse(64, 1.5, 1.0), make_speed("kappa", 1, 2), 0.0);
  io::write_trajectory(traj, dir);
  const auto back = io::read_trajectory(dir);
  ASSERT_EQ(back.snapshots.size(), traj.snapshots.size());
  EXPECT_EQ(back.T_ext, traj.T_ext);
  for (std::size_t k = 0; k < traj.snapshots.size(); k += 17) {
    EXPECT_EQ(back.snapshots[k].t, traj.snapshots[k].t);
    EXPECT_EQ(back.snapshots[k].curve.h(), traj.snapshots[k].curve.h());
    EXPECT_EQ(back.snapshots[k].dtF, traj.snapshots[k].dtF);
  }
  fs::remove_all(dir);
}

TEST(Serialization, FieldRoundTrip) {
  const auto dir = scratch("field");
  fs::create_directories(dir);
  const auto traj = run(SupportCurve::circle(64, 1.0), make_speed("kappa", 1, 1), 0.0);
  GridSpec spec;
  spec.dx = 1.0 / 32.0;
  const auto field = reconstruct(traj, spec);
  io::write_field(field, dir / "field.csv");
  const auto back = io::read_field(dir / "field.csv");
  ASSERT_EQ(back.u.size(), field.u.size());
  for (std::size_t k = 0; k < field.u.size(); ++k) {
    if (std::isnan(field.u[k])) {
      EXPECT_TRUE(std::isnan(back.u[k]));
    } else {
      EXPECT_EQ(back.u[k], field.u[k]);
    }
    EXPECT_EQ(back.mask[k], field.mask[k]);
  }
  fs::remove_all(dir);
}

TEST(Run, SmallCircleAllChecksPass) {
  auto c = small_circle();
  c.output_dir = scratch("circle");
  const auto res = run_experiment(c);
  for (const auto& o : res.checks) EXPECT_EQ(o.verdict, Verdict::pass) << o.name << ": " << o.details.dump();
  EXPECT_EQ(res.exit_code, 0);
  const auto report = io::read_json(c.output_dir / "report.json");
  EXPECT_EQ(report.at("schema_version"), io::kSchemaVersion);
  EXPECT_TRUE(report.at("all_pass").get<bool>());
  for (const char* f : {"curves.svg", "harnack.csv", "field.csv", "trajectory/meta.json"}) {
    EXPECT_TRUE(fs::exists(c.output_dir / f)) << f;
  }
  fs::remove_all(c.output_dir);
}

TEST(Run, DeterministicReports) {
  auto c = small_circle();
  c.checks = {"flow", "arrival", "concavity_z"};
  const auto a = run_experiment(c, false);
  const auto b = run_experiment(c, false);
  EXPECT_EQ(without_timing(a.report).dump(), without_timing(b.report).dump());
}

TEST(Run, LambdaMinInverseConcavityFails) {
  auto c = small_circle();
  c.speed.name = "lambda_min";
  c.speed.dimension = 2;
  c.checks = {"inverse_concavity"};
  const auto res = run_experiment(c, false);
  ASSERT_EQ(res.checks.size(), 1u);
  EXPECT_EQ(res.checks[0].verdict, Verdict::fail);
  EXPECT_TRUE(res.checks[0].details.contains("witness"));
  EXPECT_EQ(res.exit_code, 1);
}

TEST(Convergence, NeedsTwoLevels) {
  EXPECT_THROW(convergence_study(small_circle(), 1), ConfigError);
}
