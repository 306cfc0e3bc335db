#include "dronho/trajectory.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dronho/csv.hpp"
#include "dronho/errors.hpp"
#include "dronho/rng.hpp"

namespace dronho {

namespace {

constexpr double kDiag = std::numbers::sqrt2 / 2.0;
constexpr std::array<Position, Direction::kCount> kUnit{{
    {1.0, 0.0}, {kDiag, kDiag}, {0.0, 1.0}, {-kDiag, kDiag},
    {-1.0, 0.0}, {-kDiag, -kDiag}, {0.0, -1.0}, {kDiag, -kDiag},
}};

}  // namespace

Direction::Direction(int index) : index_(index) {
  if (index < 0 || index >= kCount)
    throw std::invalid_argument("direction index " + std::to_string(index) + " not in [0, 8)");
}

double Direction::angle_rad() const { return index_ * std::numbers::pi / 4.0; }

Position Direction::unit() const { return kUnit[static_cast<std::size_t>(index_)]; }

Trajectory generate_trajectory(Position start, Position end, double step_length_m,
                               const GridSpec& bounds) {
  if (!bounds.contains(start)) throw std::invalid_argument("route start lies outside the area");
  if (!bounds.contains(end)) throw std::invalid_argument("route end lies outside the area");
  if (!(step_length_m > 0.0)) throw std::invalid_argument("step length must be positive");

  Trajectory t;
  t.step_length_m = step_length_m;
  t.waypoints.push_back(start);
  Position here = start;
  double remaining = distance(here, end);
  while (true) {
    int best = -1;
    double best_dist = remaining;
    Position best_pos{};
    for (int d = 0; d < Direction::kCount; ++d) {
      Position u = kUnit[static_cast<std::size_t>(d)];
      Position next{here.x + step_length_m * u.x, here.y + step_length_m * u.y};
      if (!bounds.contains(next)) continue;
      double dist = distance(next, end);
      if (dist < best_dist) {
        best = d;
        best_dist = dist;
        best_pos = next;
      }
    }
    if (best < 0) break;
    t.directions.emplace_back(best);
    t.waypoints.push_back(best_pos);
    here = best_pos;
    remaining = best_dist;
  }
  return t;
}

std::vector<std::size_t> validate_route_coverage(const Trajectory& trajectory, const RsrpGrid& grid) {
  std::vector<std::size_t> uncovered;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const Position p = trajectory.waypoints[i];
    if (!grid.spec().contains(p) || !grid.populated(grid.spec().bin_of(p))) uncovered.push_back(i);
  }
  return uncovered;
}

RouteEndpoints random_endpoints(const GridSpec& bounds, double min_length_m, std::uint64_t seed) {
  bounds.validate();
  if (min_length_m >= std::hypot(bounds.width_m, bounds.height_m))
    throw ConfigError("minimum route length exceeds the area diagonal");
  Rng rng(seed);
  auto draw = [&] {
    return Position{rng.uniform(bounds.origin.x, bounds.origin.x + bounds.width_m),
                    rng.uniform(bounds.origin.y, bounds.origin.y + bounds.height_m)};
  };
  while (true) {
    RouteEndpoints e{draw(), draw()};
    if (distance(e.start, e.end) >= min_length_m) return e;
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "index,x_m,y_m,direction_index\n";
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    int dir = i < trajectory.directions.size() ? trajectory.directions[i].index() : -1;
    out << i << ',' << csv::format(trajectory.waypoints[i].x) << ','
        << csv::format(trajectory.waypoints[i].y) << ',' << dir << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trajectory CSV is empty");
  auto header = csv::split(line);
  if (header.size() != 4 || header[0] != "index" || header[1] != "x_m" || header[2] != "y_m" ||
      header[3] != "direction_index")
    throw ParseError("trajectory CSV header must be index,x_m,y_m,direction_index");

  Trajectory t;
  std::vector<int> dirs;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto f = csv::split(line);
    if (f.size() != 4) throw ParseError("trajectory row must have 4 fields");
    if (csv::parse_int(f[0]) != static_cast<long long>(t.waypoints.size()))
      throw ParseError("trajectory indices must be consecutive from 0");
    t.waypoints.push_back({csv::parse_double(f[1]), csv::parse_double(f[2])});
    dirs.push_back(static_cast<int>(csv::parse_int(f[3])));
  }
  if (t.waypoints.empty()) throw ParseError("trajectory has no waypoints");
  for (std::size_t i = 0; i + 1 < dirs.size(); ++i) t.directions.emplace_back(dirs[i]);
  if (t.waypoints.size() >= 2) t.step_length_m = distance(t.waypoints[0], t.waypoints[1]);
  return t;
}

}  // namespace dronho
