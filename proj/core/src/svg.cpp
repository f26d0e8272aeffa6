#include "arrivallab/svg.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace arrivallab::svg {
namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kPad = 56.0;
constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

struct Box {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity(), y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void pad() {
    if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
    if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  }
};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

void open_svg(fmt::ostream& out) {
  out.print("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n",
            kWidth, kHeight);
  out.print("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
}

}  // namespace

void write_curves(const FlowTrajectory& traj, std::size_t count, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const std::size_t m = traj.snapshots.size();
  count = std::clamp<std::size_t>(count, 1, m);
  std::vector<std::vector<Vec2>> curves;
  Box box;
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t k = count == 1 ? 0 : c * (m - 1) / (count - 1);
    const auto& curve = traj.snapshots[k].curve;
    std::vector<Vec2> pts;
    for (std::size_t j = 0; j < curve.theta_count(); ++j) {
      pts.push_back(boundary_point(curve, j).position);
      box.add(pts.back().x(), pts.back().y());
    }
    curves.push_back(std::move(pts));
  }
  box.pad();
  const double scale = std::min((kWidth - 2 * kPad) / (box.x1 - box.x0), (kHeight - 2 * kPad) / (box.y1 - box.y0));
  auto sx = [&](double x) { return kPad + (x - box.x0) * scale; };
  auto sy = [&](double y) { return kHeight - kPad - (y - box.y0) * scale; };

  auto out = fmt::output_file(path.string());
  open_svg(out);
  for (std::size_t c = 0; c < curves.size(); ++c) {
    out.print("<polygon fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"", kColors[c % kColors.size()]);
    for (const Vec2& p : curves[c]) out.print("{:.2f},{:.2f} ", sx(p.x()), sy(p.y()));
    out.print("\"/>\n");
  }
  out.print("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"black\"/>\n", sx(traj.p_ext.x()), sy(traj.p_ext.y()));
  out.print("<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{} alpha={} T={:.6g}</text>\n", kPad,
            escape(traj.speed.name), traj.speed.alpha, traj.T_ext);
  out.print("</svg>\n");
}

void write_line_plot(const std::vector<Series>& series, std::string_view title, std::string_view x_label,
                     std::string_view y_label, bool log_y, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::vector<std::vector<std::pair<double, double>>> pts(series.size());
  Box box;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const std::size_t n = std::min(series[s].x.size(), series[s].y.size());
    for (std::size_t i = 0; i < n; ++i) {
      double y = series[s].y[i];
      if (log_y) {
        if (!(y > 0.0)) continue;
        y = std::log10(y);
      }
      if (!std::isfinite(y) || !std::isfinite(series[s].x[i])) continue;
      pts[s].emplace_back(series[s].x[i], y);
      box.add(series[s].x[i], y);
    }
  }
  box.pad();
  auto sx = [&](double x) { return kPad + (x - box.x0) / (box.x1 - box.x0) * (kWidth - 2 * kPad); };
  auto sy = [&](double y) { return kHeight - kPad - (y - box.y0) / (box.y1 - box.y0) * (kHeight - 2 * kPad); };

  auto out = fmt::output_file(path.string());
  open_svg(out);
  out.print("<rect x=\"{0}\" y=\"{0}\" width=\"{1}\" height=\"{2}\" fill=\"none\" stroke=\"#888\"/>\n", kPad,
            kWidth - 2 * kPad, kHeight - 2 * kPad);
  for (std::size_t s = 0; s < pts.size(); ++s) {
    const char* color = kColors[s % kColors.size()];
    out.print("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", color);
    for (const auto& [x, y] : pts[s]) out.print("{:.2f},{:.2f} ", sx(x), sy(y));
    out.print("\"/>\n");
    out.print("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{}\">{}</text>\n",
              kWidth - kPad - 150, kPad + 16 + 14 * static_cast<double>(s), color, escape(series[s].label));
  }
  const std::string y_axis = log_y ? fmt::format("log10 {}", y_label) : std::string(y_label);
  out.print("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n", kPad, escape(title));
  out.print("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}: [{:.4g}, {:.4g}]</text>\n", kPad,
            kHeight - 18, escape(x_label), box.x0, box.x1);
  out.print("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}: [{:.4g}, {:.4g}]</text>\n",
            kWidth / 2, kHeight - 18, escape(y_axis), box.y0, box.y1);
  out.print("</svg>\n");
}

}  // namespace arrivallab::svg
