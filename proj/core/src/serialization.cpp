#include "arrivallab/serialization.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <fstream>
#include <stdexcept>

namespace arrivallab::io {
namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::vector<double> split_doubles(const std::string& line) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t comma = line.find(',', start);
    const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(std::stod(cell));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

nlohmann::json vec_json(const Vec2& v) { return nlohmann::json::array({v.x(), v.y()}); }
Vec2 json_vec(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

FlowStatus parse_status(const std::string& s) {
  if (s == "completed") return FlowStatus::completed;
  if (s == "convexity_lost") return FlowStatus::convexity_lost;
  if (s == "step_limit") return FlowStatus::step_limit;
  throw std::runtime_error("unknown flow status '" + s + "'");
}

CellMask parse_mask(const std::string& s) {
  if (s == "interior") return CellMask::interior;
  if (s == "boundary_layer") return CellMask::boundary_layer;
  if (s == "extinction_ball") return CellMask::extinction_ball;
  if (s == "exterior") return CellMask::exterior;
  throw std::runtime_error("unknown cell mask '" + s + "'");
}

}  // namespace

void write_json(const nlohmann::json& doc, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  auto in = open_input(path);
  return nlohmann::json::parse(in);
}

nlohmann::json trajectory_meta(const FlowTrajectory& traj) {
  const auto& first = traj.snapshots.front().curve;
  return {{"schema_version", kSchemaVersion},
          {"speed", {{"name", traj.speed.name}, {"alpha", traj.speed.alpha}, {"parameter", traj.speed.parameter}}},
          {"theta_count", first.theta_count()},
          {"scheme", to_string(first.scheme())},
          {"origin", vec_json(first.origin())},
          {"t0", traj.t0},
          {"T_ext", traj.T_ext},
          {"p_ext", vec_json(traj.p_ext)},
          {"status", to_string(traj.status)},
          {"diagnostic", traj.diagnostic},
          {"steps", traj.steps},
          {"snapshots", traj.snapshots.size()},
          {"initial_inradius", traj.initial_inradius},
          {"options",
           {{"dt_safety", traj.opts.dt_safety},
            {"extinction_fraction", traj.opts.extinction_fraction},
            {"snapshot_cadence", traj.opts.snapshot_cadence},
            {"max_steps", traj.opts.max_steps},
            {"max_halvings", traj.opts.max_halvings}}}};
}

void write_trajectory(const FlowTrajectory& traj, const fs::path& dir) {
  fs::create_directories(dir);
  write_json(trajectory_meta(traj), dir / "meta.json");
  auto out = fmt::output_file((dir / "snapshots.csv").string());
  out.print("t,theta,h,kappa,F,F_s,F_ss,dtF\n");
  for (const auto& s : traj.snapshots) {
    for (std::size_t j = 0; j < s.F.size(); ++j) {
      out.print("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.t, s.curve.theta(j),
                s.curve.h()[j], s.kappa[j], s.F[j], s.F_s[j], s.F_ss[j], s.dtF[j]);
    }
  }
}

FlowTrajectory read_trajectory(const fs::path& dir) {
  const auto meta = read_json(dir / "meta.json");
  FlowTrajectory traj;
  const auto& sp = meta.at("speed");
  traj.speed = make_speed(sp.at("name").get<std::string>(), 1, sp.at("alpha").get<double>(),
                          sp.at("parameter").get<double>());
  traj.t0 = meta.at("t0").get<double>();
  traj.T_ext = meta.at("T_ext").get<double>();
  traj.p_ext = json_vec(meta.at("p_ext"));
  traj.status = parse_status(meta.at("status").get<std::string>());
  traj.diagnostic = meta.at("diagnostic").get<std::string>();
  traj.steps = meta.at("steps").get<std::size_t>();
  traj.initial_inradius = meta.at("initial_inradius").get<double>();
  const auto& o = meta.at("options");
  traj.opts.dt_safety = o.at("dt_safety").get<double>();
  traj.opts.extinction_fraction = o.at("extinction_fraction").get<double>();
  traj.opts.snapshot_cadence = o.at("snapshot_cadence").get<double>();
  traj.opts.max_steps = o.at("max_steps").get<std::size_t>();
  traj.opts.max_halvings = o.at("max_halvings").get<int>();
  const auto n = meta.at("theta_count").get<std::size_t>();
  const DiffScheme scheme = parse_diff_scheme(meta.at("scheme").get<std::string>());
  const Vec2 origin = json_vec(meta.at("origin"));

  auto in = open_input(dir / "snapshots.csv");
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> h;
  double t = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = split_doubles(line);
    if (row.size() != 8) throw std::runtime_error("snapshots.csv: expected 8 columns");
    if (h.empty()) t = row[0];
    h.push_back(row[2]);
    if (h.size() == n) {
      traj.snapshots.push_back(make_snapshot(SupportCurve(std::move(h), origin, scheme), t, traj.speed));
      h.clear();
    }
  }
  if (!h.empty()) throw std::runtime_error("snapshots.csv: trailing partial snapshot");
  if (traj.snapshots.empty()) throw std::runtime_error("snapshots.csv: no snapshots");
  return traj;
}

void write_field(const ArrivalField& f, const fs::path& csv_path) {
  if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
  {
    auto out = fmt::output_file(csv_path.string());
    out.print("x,y,u,mask\n");
    for (std::size_t j = 0; j < f.grid.ny; ++j) {
      for (std::size_t i = 0; i < f.grid.nx; ++i) {
        const Vec2 p = f.grid.point(i, j);
        out.print("{:.17g},{:.17g},{:.17g},{}\n", p.x(), p.y(), f.u_at(i, j), to_string(f.mask_at(i, j)));
      }
    }
  }
  fs::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  write_json({{"schema_version", kSchemaVersion},
              {"grid", {{"x0", f.grid.x0}, {"y0", f.grid.y0}, {"dx", f.grid.dx}, {"nx", f.grid.nx}, {"ny", f.grid.ny}}},
              {"t0", f.t0},
              {"T_ext", f.T_ext},
              {"p_ext", vec_json(f.p_ext)},
              {"alpha", f.alpha},
              {"r_excl", f.r_excl},
              {"stencil_order", f.stencil_order},
              {"interpolation", to_string(f.interpolation)}},
             sidecar);
}

ArrivalField read_field(const fs::path& csv_path) {
  fs::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  const auto meta = read_json(sidecar);
  ArrivalField f;
  const auto& g = meta.at("grid");
  f.grid = {g.at("x0").get<double>(), g.at("y0").get<double>(), g.at("dx").get<double>(),
            g.at("nx").get<std::size_t>(), g.at("ny").get<std::size_t>()};
  f.t0 = meta.at("t0").get<double>();
  f.T_ext = meta.at("T_ext").get<double>();
  f.p_ext = json_vec(meta.at("p_ext"));
  f.alpha = meta.at("alpha").get<double>();
  f.r_excl = meta.at("r_excl").get<double>();
  f.stencil_order = meta.at("stencil_order").get<int>();
  f.interpolation = parse_interpolation(meta.at("interpolation").get<std::string>());
  f.u.reserve(f.grid.size());
  f.mask.reserve(f.grid.size());

  auto in = open_input(csv_path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t last = line.rfind(',');
    const auto nums = split_doubles(line.substr(0, last));
    f.u.push_back(nums.at(2));
    f.mask.push_back(parse_mask(line.substr(last + 1)));
  }
  if (f.u.size() != f.grid.size()) throw std::runtime_error("field CSV does not match its grid");
  return f;
}

void write_harnack_csv(const HarnackReport& report, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto out = fmt::output_file(path.string());
  out.print("t,theta,Q\n");
  for (const auto& m : report.per_snapshot) out.print("{:.17g},{:.17g},{:.17g}\n", m.t, m.theta, m.q_min);
}

}  // namespace arrivallab::io
