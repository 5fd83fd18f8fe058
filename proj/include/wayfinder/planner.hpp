#pragma once

#include "wayfinder/common.hpp"
#include "wayfinder/geometry.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace wf::planner {

enum class CellState : std::uint8_t { Free = 0, Occupied = 1, Unknown = 2 };

struct Cell {
  int x = 0;
  int y = 0;

  auto operator<=>(const Cell&) const = default;
};

/// Rectangular occupancy grid. Cell (0, 0) has its lower-left corner at
/// `origin`; x grows along world +x, y along world +y.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, double origin_x = 0.0, double origin_y = 0.0,
                CellState fill = CellState::Unknown);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_at_index(std::size_t i) const { return {static_cast<int>(i % width_), static_cast<int>(i / width_)}; }

  CellState at(Cell c) const { return cells_[index(c)]; }
  void set(Cell c, CellState s) { cells_[index(c)] = s; }
  bool is_free(Cell c) const { return in_bounds(c) && at(c) == CellState::Free; }

  /// Cell containing a world point, or nullopt outside the grid.
  std::optional<Cell> cell_of(double x, double y) const;
  /// World coordinates of a cell center.
  std::pair<double, double> center(Cell c) const;

  std::size_t count(CellState s) const;
  const std::vector<CellState>& cells() const { return cells_; }

  bool operator==(const OccupancyGrid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.25;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  std::vector<CellState> cells_;
};

/// Path cost a + b*sqrt(2) held as integer step counts so optimal costs can
/// be compared exactly.
struct PathCost {
  std::int64_t axial = 0;
  std::int64_t diagonal = 0;

  double value() const;
  PathCost operator+(const PathCost& o) const { return {axial + o.axial, diagonal + o.diagonal}; }
  bool operator==(const PathCost&) const = default;
  std::strong_ordering operator<=>(const PathCost& o) const;
};

/// Octile distance between two cells.
PathCost octile(Cell a, Cell b);

/// When a diagonal move between two cells is refused.
enum class CornerRule {
  /// Both axial neighbors blocked.
  BothBlocked,
  /// Either axial neighbor blocked.
  AnyBlocked,
};

struct AstarResult {
  std::vector<Cell> path;
  PathCost cost;
};

/// 8-connected A* over free cells with the octile heuristic. Frontier ties
/// are broken by lower cell index. Returns nullopt when the goal is blocked
/// or unreachable.
std::optional<AstarResult> astar(const OccupancyGrid& grid, Cell start, Cell goal,
                                 CornerRule rule = CornerRule::BothBlocked);

/// Single-source shortest path costs over a generic 8-connected raster.
/// Unreached cells hold nullopt.
std::vector<std::optional<PathCost>> grid_dijkstra(int width, int height,
                                                   const std::function<bool(int, int)>& passable,
                                                   Cell source, CornerRule rule = CornerRule::BothBlocked);

enum class Action : std::uint8_t { Forward, TurnLeft, TurnRight, Stop };
std::string_view to_string(Action a);
Action action_from_string(std::string_view s);

struct MotionModel {
  double forward_step = 0.25;
  double turn_angle = geometry::kPi / 6.0;
  /// Heading error accepted before moving forward.
  double heading_tolerance = geometry::kPi / 12.0;
  /// Distance at which a waypoint counts as reached.
  double arrival_radius = 0.25;
  std::size_t max_actions = 4096;
};

/// Drops interior cells of straight runs, keeping endpoints and corners.
std::vector<Cell> compress_path(const std::vector<Cell>& path);

/// Greedy action synthesis along a cell path: turn in 30 degree steps until
/// the bearing to the next waypoint is within tolerance, step forward, and
/// finish with Stop once the final cell center is within the arrival radius.
std::vector<Action> path_to_actions(const std::vector<Cell>& path, const geometry::AgentPose& pose,
                                    const OccupancyGrid& grid, const MotionModel& motion = {});

/// First action of path_to_actions without building the whole sequence.
Action next_action(const std::vector<Cell>& path, const geometry::AgentPose& pose, const OccupancyGrid& grid,
                   const MotionModel& motion = {});

/// Turn direction that best reduces a signed heading error; a half-turn
/// resolves to the left.
Action turn_toward(double heading_error);

/// Free cells with at least one unknown 4-neighbor, in index order.
std::vector<Cell> find_frontiers(const OccupancyGrid& grid);

/// Nearest cell by Euclidean cell distance; ties resolved by (x, y).
std::optional<Cell> nearest_cell(const std::vector<Cell>& cells, Cell from);

/// Half the free-cell count, rounded up.
std::size_t exploration_budget(const OccupancyGrid& grid);

/// Free cells reachable from `start` under the planner's connectivity.
std::vector<bool> reachable_cells(const OccupancyGrid& grid, Cell start, CornerRule rule = CornerRule::BothBlocked);

// PGM (P5) with a JSON sidecar at `<path>.json`: 254 free, 0 occupied, 205
// unknown; the first image row is the top (highest y) of the grid.
void write_pgm(const OccupancyGrid& grid, const std::filesystem::path& path);
OccupancyGrid read_pgm(const std::filesystem::path& path);

}  // namespace wf::planner
