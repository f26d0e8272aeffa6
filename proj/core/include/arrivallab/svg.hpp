#pragma once

#include "arrivallab/flow_solver.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace arrivallab::svg {

/// Boundaries of up to `count` snapshots, evenly spaced in snapshot index.
void write_curves(const FlowTrajectory& traj, std::size_t count, const std::filesystem::path& path);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Plain line plot with axis extents and a legend. With log_y, non-positive
/// values are dropped and the axis shows log10(y).
void write_line_plot(const std::vector<Series>& series, std::string_view title, std::string_view x_label,
                     std::string_view y_label, bool log_y, const std::filesystem::path& path);

}  // namespace arrivallab::svg
