#pragma once

#include "arrivallab/arrival_time.hpp"
#include "arrivallab/flow_solver.hpp"
#include "arrivallab/harnack_checker.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace arrivallab::io {

/// Bumped whenever a field is renamed or removed from a written document.
inline constexpr int kSchemaVersion = 1;

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

nlohmann::json trajectory_meta(const FlowTrajectory& traj);

/// dir/meta.json plus dir/snapshots.csv with one row per (snapshot, node):
/// t, theta, h, kappa, F, F_s, F_ss, dtF at 17 significant digits.
void write_trajectory(const FlowTrajectory& traj, const std::filesystem::path& dir);
/// Rebuilds every snapshot from (t, h) and the recorded speed; derived
/// columns are recomputed, so a round trip is exact.
FlowTrajectory read_trajectory(const std::filesystem::path& dir);

/// CSV (x, y, u, mask) and a JSON sidecar at csv_path with extension .json.
void write_field(const ArrivalField& field, const std::filesystem::path& csv_path);
ArrivalField read_field(const std::filesystem::path& csv_path);

/// Per-snapshot minima (t, theta, Q) of a Harnack report.
void write_harnack_csv(const HarnackReport& report, const std::filesystem::path& path);

}  // namespace arrivallab::io
