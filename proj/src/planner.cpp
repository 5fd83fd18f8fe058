#include "wayfinder/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <tuple>

namespace wf::planner {

namespace {

constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

template <typename Passable>
bool diagonal_allowed(const Passable& passable, int x, int y, int dx, int dy, CornerRule rule) {
  const bool a = passable(x + dx, y);
  const bool b = passable(x, y + dy);
  return rule == CornerRule::BothBlocked ? (a || b) : (a && b);
}

struct QueueEntry {
  PathCost key;
  std::size_t index;
  bool operator>(const QueueEntry& o) const {
    const auto c = key <=> o.key;
    if (c != 0) return c > 0;
    return index > o.index;
  }
};

using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>>;

}  // namespace

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, double origin_x, double origin_y,
                             CellState fill)
    : width_(width), height_(height), resolution_(resolution), origin_x_(origin_x), origin_y_(origin_y) {
  require(width > 0 && height > 0, "occupancy grid must be non-empty");
  require(resolution > 0.0, "occupancy grid resolution must be positive");
  cells_.assign(static_cast<std::size_t>(width) * height, fill);
}

std::optional<Cell> OccupancyGrid::cell_of(double x, double y) const {
  const Cell c{static_cast<int>(std::floor((x - origin_x_) / resolution_)),
               static_cast<int>(std::floor((y - origin_y_) / resolution_))};
  if (!in_bounds(c)) return std::nullopt;
  return c;
}

std::pair<double, double> OccupancyGrid::center(Cell c) const {
  return {origin_x_ + (c.x + 0.5) * resolution_, origin_y_ + (c.y + 0.5) * resolution_};
}

std::size_t OccupancyGrid::count(CellState s) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

double PathCost::value() const { return static_cast<double>(axial) + std::sqrt(2.0) * diagonal; }

std::strong_ordering PathCost::operator<=>(const PathCost& o) const {
  const std::int64_t da = axial - o.axial;
  const std::int64_t db = diagonal - o.diagonal;
  auto sign = [](std::int64_t v) { return v < 0 ? std::strong_ordering::less
                                      : v > 0 ? std::strong_ordering::greater
                                              : std::strong_ordering::equal; };
  if (db == 0) return sign(da);
  if (da == 0 || (da > 0) == (db > 0)) return sign(da == 0 ? db : da);
  // Opposite signs: compare |da| against |db| * sqrt(2) by squaring.
  const std::int64_t n = da * da - 2 * db * db;
  return da > 0 ? sign(n) : sign(-n);
}

PathCost octile(Cell a, Cell b) {
  const std::int64_t dx = std::abs(a.x - b.x);
  const std::int64_t dy = std::abs(a.y - b.y);
  return {std::max(dx, dy) - std::min(dx, dy), std::min(dx, dy)};
}

std::optional<AstarResult> astar(const OccupancyGrid& grid, Cell start, Cell goal, CornerRule rule) {
  require(grid.is_free(start), "astar start must be a free cell");
  if (!grid.is_free(goal)) return std::nullopt;

  const auto passable = [&](int x, int y) { return grid.is_free({x, y}); };
  const std::size_t n = grid.size();
  std::vector<std::optional<PathCost>> g(n);
  std::vector<std::size_t> parent(n, n);
  std::vector<bool> closed(n, false);
  MinQueue open;

  const std::size_t s = grid.index(start);
  const std::size_t t = grid.index(goal);
  g[s] = PathCost{};
  open.push({octile(start, goal), s});
  while (!open.empty()) {
    const auto [f, ci] = open.top();
    open.pop();
    if (closed[ci]) continue;
    closed[ci] = true;
    if (ci == t) break;
    const Cell c = grid.cell_at_index(ci);
    for (int k = 0; k < 8; ++k) {
      const Cell nb{c.x + kDx[k], c.y + kDy[k]};
      if (!passable(nb.x, nb.y)) continue;
      const bool diag = k >= 4;
      if (diag && !diagonal_allowed(passable, c.x, c.y, kDx[k], kDy[k], rule)) continue;
      const std::size_t ni = grid.index(nb);
      if (closed[ni]) continue;
      const PathCost cand = *g[ci] + (diag ? PathCost{0, 1} : PathCost{1, 0});
      if (!g[ni] || cand < *g[ni]) {
        g[ni] = cand;
        parent[ni] = ci;
        open.push({cand + octile(nb, goal), ni});
      }
    }
  }
  if (!closed[t]) return std::nullopt;

  AstarResult out;
  out.cost = *g[t];
  for (std::size_t i = t; i != n; i = parent[i]) out.path.push_back(grid.cell_at_index(i));
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

std::vector<std::optional<PathCost>> grid_dijkstra(int width, int height,
                                                   const std::function<bool(int, int)>& passable_raw,
                                                   Cell source, CornerRule rule) {
  require(width > 0 && height > 0, "raster must be non-empty");
  const auto passable = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < width && y < height && passable_raw(x, y);
  };
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<std::optional<PathCost>> dist(n);
  if (!passable(source.x, source.y)) return dist;
  std::vector<bool> done(n, false);
  MinQueue open;
  const auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * width + x; };
  dist[idx(source.x, source.y)] = PathCost{};
  open.push({PathCost{}, idx(source.x, source.y)});
  while (!open.empty()) {
    const auto [d, ci] = open.top();
    open.pop();
    if (done[ci]) continue;
    done[ci] = true;
    const int x = static_cast<int>(ci % width);
    const int y = static_cast<int>(ci / width);
    for (int k = 0; k < 8; ++k) {
      const int nx = x + kDx[k], ny = y + kDy[k];
      if (!passable(nx, ny)) continue;
      const bool diag = k >= 4;
      if (diag && !diagonal_allowed(passable, x, y, kDx[k], kDy[k], rule)) continue;
      const std::size_t ni = idx(nx, ny);
      if (done[ni]) continue;
      const PathCost cand = d + (diag ? PathCost{0, 1} : PathCost{1, 0});
      if (!dist[ni] || cand < *dist[ni]) {
        dist[ni] = cand;
        open.push({cand, ni});
      }
    }
  }
  return dist;
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Forward: return "forward";
    case Action::TurnLeft: return "turn_left";
    case Action::TurnRight: return "turn_right";
    case Action::Stop: return "stop";
  }
  return "stop";
}

Action action_from_string(std::string_view s) {
  if (s == "forward") return Action::Forward;
  if (s == "turn_left") return Action::TurnLeft;
  if (s == "turn_right") return Action::TurnRight;
  if (s == "stop") return Action::Stop;
  throw ParseError("unknown action: " + std::string(s));
}

std::vector<Cell> compress_path(const std::vector<Cell>& path) {
  if (path.size() <= 2) return path;
  std::vector<Cell> out{path.front()};
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const int dx0 = path[i].x - path[i - 1].x, dy0 = path[i].y - path[i - 1].y;
    const int dx1 = path[i + 1].x - path[i].x, dy1 = path[i + 1].y - path[i].y;
    if (dx0 != dx1 || dy0 != dy1) out.push_back(path[i]);
  }
  out.push_back(path.back());
  return out;
}

Action turn_toward(double heading_error) {
  // normalize_angle maps a half-turn to +pi, so ties turn left.
  return geometry::normalize_angle(heading_error) > 0.0 ? Action::TurnLeft : Action::TurnRight;
}

namespace {

// Advances along waypoints, emitting actions through `emit` until Stop or
// the action cap. Returning false from `emit` ends the walk early.
template <typename Emit>
void walk(const std::vector<Cell>& path, geometry::AgentPose pose, const OccupancyGrid& grid,
          const MotionModel& m, Emit&& emit) {
  require(!path.empty(), "path must be non-empty");
  const auto waypoints = compress_path(path);
  std::size_t next = 0;
  std::size_t emitted = 0;
  const double tol = m.heading_tolerance + 1e-9;
  while (emitted < m.max_actions) {
    // Skip every waypoint already within the arrival radius.
    while (next < waypoints.size()) {
      const auto [wx, wy] = grid.center(waypoints[next]);
      if (std::hypot(wx - pose.x, wy - pose.y) >= m.arrival_radius) break;
      ++next;
    }
    if (next == waypoints.size()) {
      emit(Action::Stop);
      return;
    }
    const auto [wx, wy] = grid.center(waypoints[next]);
    const double err = geometry::normalize_angle(std::atan2(wy - pose.y, wx - pose.x) - pose.yaw);
    Action a;
    if (std::abs(err) > tol) {
      a = turn_toward(err);
      pose = geometry::AgentPose(pose.x, pose.y, pose.yaw + (a == Action::TurnLeft ? m.turn_angle : -m.turn_angle));
    } else {
      a = Action::Forward;
      pose = geometry::AgentPose(pose.x + m.forward_step * std::cos(pose.yaw),
                                 pose.y + m.forward_step * std::sin(pose.yaw), pose.yaw);
    }
    ++emitted;
    if (!emit(a)) return;
  }
  emit(Action::Stop);
}

}  // namespace

std::vector<Action> path_to_actions(const std::vector<Cell>& path, const geometry::AgentPose& pose,
                                    const OccupancyGrid& grid, const MotionModel& motion) {
  std::vector<Action> out;
  walk(path, pose, grid, motion, [&](Action a) {
    out.push_back(a);
    return true;
  });
  return out;
}

Action next_action(const std::vector<Cell>& path, const geometry::AgentPose& pose, const OccupancyGrid& grid,
                   const MotionModel& motion) {
  Action first = Action::Stop;
  walk(path, pose, grid, motion, [&](Action a) {
    first = a;
    return false;
  });
  return first;
}

std::vector<Cell> find_frontiers(const OccupancyGrid& grid) {
  std::vector<Cell> out;
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      if (grid.at({x, y}) != CellState::Free) continue;
      for (int k = 0; k < 4; ++k) {
        const Cell nb{x + kDx[k], y + kDy[k]};
        if (grid.in_bounds(nb) && grid.at(nb) == CellState::Unknown) {
          out.push_back({x, y});
          break;
        }
      }
    }
  }
  return out;
}

std::optional<Cell> nearest_cell(const std::vector<Cell>& cells, Cell from) {
  std::optional<Cell> best;
  std::int64_t best_d = 0;
  for (const auto& c : cells) {
    const std::int64_t dx = c.x - from.x, dy = c.y - from.y;
    const std::int64_t d = dx * dx + dy * dy;
    if (!best || d < best_d || (d == best_d && c < *best)) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

std::size_t exploration_budget(const OccupancyGrid& grid) {
  const std::size_t free = grid.count(CellState::Free);
  require(free > 0, "exploration budget needs at least one free cell");
  return (free + 1) / 2;
}

std::vector<bool> reachable_cells(const OccupancyGrid& grid, Cell start, CornerRule rule) {
  std::vector<bool> seen(grid.size(), false);
  if (!grid.is_free(start)) return seen;
  const auto passable = [&](int x, int y) { return grid.is_free({x, y}); };
  std::deque<Cell> queue{start};
  seen[grid.index(start)] = true;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (int k = 0; k < 8; ++k) {
      const Cell nb{c.x + kDx[k], c.y + kDy[k]};
      if (!passable(nb.x, nb.y) || seen[grid.index(nb)]) continue;
      if (k >= 4 && !diagonal_allowed(passable, c.x, c.y, kDx[k], kDy[k], rule)) continue;
      seen[grid.index(nb)] = true;
      queue.push_back(nb);
    }
  }
  return seen;
}

}  // namespace wf::planner
