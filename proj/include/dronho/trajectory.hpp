#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dronho/radio_map.hpp"

namespace dronho {

/// One of eight headings, index * pi/4 counter-clockwise from +x.
class Direction {
public:
  static constexpr int kCount = 8;

  constexpr Direction() = default;
  explicit Direction(int index);

  int index() const { return index_; }
  double angle_rad() const;
  /// Unit vector; axis-aligned headings are exact.
  Position unit() const;

  bool operator==(const Direction&) const = default;

private:
  int index_ = 0;
};

struct Trajectory {
  std::vector<Position> waypoints;
  /// directions[i] is the heading taken from waypoints[i] to waypoints[i + 1].
  std::vector<Direction> directions;
  double step_length_m = 0.0;

  std::size_t size() const { return waypoints.size(); }
};

/// Greedy eight-direction stepping from start toward end. Each step takes the
/// in-bounds heading whose next waypoint is closest to end (lowest index on
/// ties) and stops once no heading strictly reduces the distance.
Trajectory generate_trajectory(Position start, Position end, double step_length_m,
                               const GridSpec& bounds);

/// Waypoints whose bins hold no samples. Empty means the route is covered.
std::vector<std::size_t> validate_route_coverage(const Trajectory& trajectory, const RsrpGrid& grid);

/// Endpoints drawn uniformly over the area interior, at least min_length_m apart.
struct RouteEndpoints {
  Position start;
  Position end;
};
RouteEndpoints random_endpoints(const GridSpec& bounds, double min_length_m, std::uint64_t seed);

/// `index,x_m,y_m,direction_index`. The last waypoint has direction -1.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace dronho
