#include "wayfinder/planner.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <queue>
#include <random>

using namespace wf;
using namespace wf::planner;

namespace {

OccupancyGrid random_grid(std::mt19937_64& rng, int w, int h, double p_block) {
  OccupancyGrid g(w, h, 0.25, 0, 0, CellState::Free);
  std::bernoulli_distribution block(p_block);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (block(rng)) g.set({x, y}, rng() % 4 == 0 ? CellState::Unknown : CellState::Occupied);
  return g;
}

// Textbook Dijkstra over (axial, diagonal) step counts keyed by their length.
std::map<Cell, std::pair<long, long>> oracle(const OccupancyGrid& g, Cell s, bool any_blocked) {
  using Key = std::pair<long double, Cell>;
  std::map<Cell, std::pair<long, long>> best;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> pq;
  auto len = [](std::pair<long, long> c) { return c.first + c.second * std::sqrt(2.0L); };
  best[s] = {0, 0};
  pq.push({0, s});
  while (!pq.empty()) {
    const auto [d, c] = pq.top();
    pq.pop();
    if (d > len(best[c]) + 1e-12L) continue;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        if (!dx && !dy) continue;
        const Cell n{c.x + dx, c.y + dy};
        if (!g.is_free(n)) continue;
        if (dx && dy) {
          const bool a = g.is_free({c.x + dx, c.y}), b = g.is_free({c.x, c.y + dy});
          if (any_blocked ? !(a && b) : !(a || b)) continue;
        }
        auto cost = best[c];
        (dx && dy ? cost.second : cost.first) += 1;
        const auto it = best.find(n);
        if (it == best.end() || len(cost) < len(it->second) - 1e-12L) {
          best[n] = cost;
          pq.push({len(cost), n});
        }
      }
  }
  return best;
}

// Kinematic replay of an action list.
geometry::AgentPose replay(geometry::AgentPose p, const std::vector<Action>& actions, const MotionModel& m = {}) {
  for (auto a : actions) {
    if (a == Action::Forward) p = {p.x + m.forward_step * std::cos(p.yaw), p.y + m.forward_step * std::sin(p.yaw), p.yaw};
    if (a == Action::TurnLeft) p = {p.x, p.y, p.yaw + m.turn_angle};
    if (a == Action::TurnRight) p = {p.x, p.y, p.yaw - m.turn_angle};
  }
  return p;
}

}  // namespace

TEST_CASE("astar examples") {
  OccupancyGrid g(10, 10, 0.25, 0, 0, CellState::Free);
  auto r = astar(g, {0, 0}, {0, 9});
  REQUIRE(r);
  CHECK(r->cost.value() == 9.0);
  CHECK(r->path.size() == 10);
  CHECK(r->path.front() == Cell{0, 0});
  CHECK(r->path.back() == Cell{0, 9});

  r = astar(g, {0, 0}, {9, 9});
  REQUIRE(r);
  CHECK(r->cost == PathCost{0, 9});

  for (int y = 0; y < 10; ++y) g.set({5, y}, CellState::Occupied);
  CHECK_FALSE(astar(g, {0, 0}, {9, 0}));
  CHECK_FALSE(astar(g, {0, 0}, {5, 5}));
  g.set({5, 3}, CellState::Unknown);
  CHECK_FALSE(astar(g, {0, 0}, {9, 0}));
  CHECK_THROWS_AS(astar(g, {5, 0}, {0, 0}), ContractViolation);
}

TEST_CASE("diagonal corner rules") {
  OccupancyGrid g(2, 2, 0.25, 0, 0, CellState::Free);
  g.set({1, 0}, CellState::Occupied);
  auto r = astar(g, {0, 0}, {1, 1}, CornerRule::BothBlocked);
  REQUIRE(r);
  CHECK(r->cost == PathCost{0, 1});
  r = astar(g, {0, 0}, {1, 1}, CornerRule::AnyBlocked);
  REQUIRE(r);
  CHECK(r->cost == PathCost{2, 0});
  g.set({0, 1}, CellState::Occupied);
  CHECK_FALSE(astar(g, {0, 0}, {1, 1}, CornerRule::BothBlocked));
}

TEST_CASE("astar cost equals a Dijkstra oracle on random grids") {
  std::mt19937_64 rng(2024);
  int solved = 0;
  for (int t = 0; t < 100; ++t) {
    const auto g = random_grid(rng, 50, 50, 0.3);
    Cell s{static_cast<int>(rng() % 50), static_cast<int>(rng() % 50)};
    while (!g.is_free(s)) s = {static_cast<int>(rng() % 50), static_cast<int>(rng() % 50)};
    const bool any = t % 2 == 1;
    const auto rule = any ? CornerRule::AnyBlocked : CornerRule::BothBlocked;
    const auto ref = oracle(g, s, any);
    const auto lib = grid_dijkstra(g.width(), g.height(), [&](int x, int y) { return g.is_free({x, y}); }, s, rule);
    for (int k = 0; k < 20; ++k) {
      const Cell goal{static_cast<int>(rng() % 50), static_cast<int>(rng() % 50)};
      const auto r = astar(g, s, goal, rule);
      const auto it = ref.find(goal);
      REQUIRE(r.has_value() == (it != ref.end()));
      REQUIRE(lib[g.index(goal)].has_value() == (it != ref.end()));
      if (!r) continue;
      ++solved;
      CHECK(r->cost.axial == it->second.first);
      CHECK(r->cost.diagonal == it->second.second);
      CHECK(*lib[g.index(goal)] == r->cost);
      // The path itself is valid and realizes the reported cost.
      PathCost walked;
      for (std::size_t i = 1; i < r->path.size(); ++i) {
        const int dx = std::abs(r->path[i].x - r->path[i - 1].x), dy = std::abs(r->path[i].y - r->path[i - 1].y);
        REQUIRE(std::max(dx, dy) == 1);
        CHECK(g.is_free(r->path[i]));
        walked = walked + (dx && dy ? PathCost{0, 1} : PathCost{1, 0});
      }
      CHECK(walked == r->cost);
    }
  }
  CHECK(solved > 200);
}

TEST_CASE("octile heuristic is the open-grid distance") {
  OccupancyGrid g(30, 30, 0.25, 0, 0, CellState::Free);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Cell a{static_cast<int>(rng() % 30), static_cast<int>(rng() % 30)};
    const Cell b{static_cast<int>(rng() % 30), static_cast<int>(rng() % 30)};
    CHECK(astar(g, a, b)->cost == octile(a, b));
  }
  CHECK(octile({0, 0}, {3, 5}) == PathCost{2, 3});
  CHECK(PathCost{1, 0} < PathCost{0, 1});
  CHECK(PathCost{0, 2} < PathCost{3, 0});
}

TEST_CASE("path_to_actions examples") {
  OccupancyGrid g(20, 20, 0.25, 0, 0, CellState::Free);
  const auto [sx, sy] = g.center({5, 5});
  std::vector<Cell> ahead{{5, 5}, {6, 5}, {7, 5}, {8, 5}, {9, 5}};
  auto a = path_to_actions(ahead, {sx, sy, 0}, g);
  CHECK(a == std::vector<Action>{Action::Forward, Action::Forward, Action::Forward, Action::Forward, Action::Stop});

  std::vector<Cell> behind{{5, 5}, {4, 5}, {3, 5}, {2, 5}, {1, 5}};
  a = path_to_actions(behind, {sx, sy, 0}, g);
  REQUIRE(a.size() == 11);
  for (int i = 0; i < 6; ++i) CHECK(a[static_cast<std::size_t>(i)] == a[0]);
  CHECK(a[0] != Action::Forward);
  for (int i = 6; i < 10; ++i) CHECK(a[static_cast<std::size_t>(i)] == Action::Forward);
  CHECK(a.back() == Action::Stop);

  a = path_to_actions({{5, 5}}, {sx + 0.1, sy, 1.0}, g);
  CHECK(a == std::vector<Action>{Action::Stop});

  // Target 90 degrees to the left turns left three times.
  a = path_to_actions({{5, 5}, {5, 6}, {5, 7}}, {sx, sy, 0}, g);
  CHECK(a[0] == Action::TurnLeft);
  CHECK(a[1] == Action::TurnLeft);
  CHECK(a[2] == Action::TurnLeft);
  CHECK(a[3] == Action::Forward);
  CHECK_THROWS_AS(path_to_actions({}, {sx, sy, 0}, g), ContractViolation);
}

TEST_CASE("replayed actions end near the final cell") {
  std::mt19937_64 rng(77);
  OccupancyGrid open(40, 40, 0.25, -2.0, 3.0, CellState::Free);
  for (int t = 0; t < 300; ++t) {
    const auto g = t % 2 ? open : random_grid(rng, 40, 40, 0.2);
    Cell s{static_cast<int>(rng() % 40), static_cast<int>(rng() % 40)};
    Cell e{static_cast<int>(rng() % 40), static_cast<int>(rng() % 40)};
    if (!g.is_free(s) || !g.is_free(e)) continue;
    const auto r = astar(g, s, e);
    if (!r) continue;
    const auto [x, y] = g.center(s);
    const double yaw = static_cast<double>(rng() % 12) * geometry::kPi / 6;
    const auto actions = path_to_actions(r->path, {x, y, yaw}, g);
    REQUIRE_FALSE(actions.empty());
    CHECK(actions.back() == Action::Stop);
    CHECK(std::count(actions.begin(), actions.end(), Action::Stop) == 1);
    const auto end = replay({x, y, yaw}, actions);
    const auto [ex, ey] = g.center(e);
    CHECK(std::hypot(end.x - ex, end.y - ey) < 0.25);
    CHECK(next_action(r->path, {x, y, yaw}, g) == actions.front());
  }
}

TEST_CASE("frontier examples") {
  OccupancyGrid known(4, 4, 0.25, 0, 0, CellState::Free);
  known.set({1, 1}, CellState::Occupied);
  CHECK(find_frontiers(known).empty());

  OccupancyGrid lone(3, 3, 0.25);
  lone.set({1, 1}, CellState::Free);
  CHECK(find_frontiers(lone) == std::vector<Cell>{{1, 1}});

  OccupancyGrid half(5, 5, 0.25);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 3; ++x) half.set({x, y}, CellState::Free);
  const auto f = find_frontiers(half);
  REQUIRE(f.size() == 5);
  for (const auto& c : f) CHECK(c.x == 2);

  // Occupied neighbors never make a frontier.
  OccupancyGrid walled(3, 1, 0.25);
  walled.set({0, 0}, CellState::Free);
  walled.set({1, 0}, CellState::Occupied);
  CHECK(find_frontiers(walled).empty());
}

TEST_CASE("frontier property against a brute-force definition") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    OccupancyGrid g(20, 15, 0.25);
    for (std::size_t i = 0; i < g.size(); ++i) g.set(g.cell_at_index(i), static_cast<CellState>(rng() % 3));
    const auto f = find_frontiers(g);
    std::vector<Cell> expect;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto c = g.cell_at_index(i);
      if (g.at(c) != CellState::Free) continue;
      const Cell nb[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
      if (std::any_of(std::begin(nb), std::end(nb), [&](Cell n) { return g.in_bounds(n) && g.at(n) == CellState::Unknown; }))
        expect.push_back(c);
    }
    CHECK(f == expect);
  }
}

TEST_CASE("nearest frontier selection") {
  const std::vector<Cell> cells{{5, 0}, {0, 5}, {3, 4}, {4, 3}};
  CHECK(*nearest_cell(cells, {0, 0}) == Cell{0, 5});
  CHECK(*nearest_cell(cells, {4, 4}) == Cell{3, 4});
  CHECK_FALSE(nearest_cell({}, {0, 0}));
}

TEST_CASE("exploration budget") {
  OccupancyGrid g(10, 10, 0.25, 0, 0, CellState::Free);
  CHECK(exploration_budget(g) == 50);
  OccupancyGrid one(3, 3, 0.25, 0, 0, CellState::Occupied);
  one.set({1, 1}, CellState::Free);
  CHECK(exploration_budget(one) == 1);
  one.set({0, 1}, CellState::Free);
  one.set({2, 1}, CellState::Free);
  CHECK(exploration_budget(one) == 2);
  OccupancyGrid none(3, 3, 0.25);
  CHECK_THROWS_AS(exploration_budget(none), ContractViolation);
}

TEST_CASE("reachable cells flood fill") {
  OccupancyGrid g(5, 1, 0.25, 0, 0, CellState::Free);
  g.set({2, 0}, CellState::Occupied);
  const auto r = reachable_cells(g, {0, 0});
  CHECK(r[0]);
  CHECK(r[1]);
  CHECK_FALSE(r[2]);
  CHECK_FALSE(r[3]);
}

TEST_CASE("grid geometry") {
  OccupancyGrid g(4, 3, 0.5, -1.0, 2.0);
  CHECK(*g.cell_of(-1.0, 2.0) == Cell{0, 0});
  CHECK(*g.cell_of(0.99, 3.49) == Cell{3, 2});
  CHECK_FALSE(g.cell_of(1.0, 2.0));
  CHECK_FALSE(g.cell_of(-1.01, 2.0));
  const auto [cx, cy] = g.center({1, 2});
  CHECK(cx == doctest::Approx(-0.25));
  CHECK(cy == doctest::Approx(3.25));
  CHECK(action_from_string(to_string(Action::TurnRight)) == Action::TurnRight);
  CHECK_THROWS_AS(action_from_string("jump"), ParseError);
}

TEST_CASE("pgm round trip") {
  std::mt19937_64 rng(5);
  OccupancyGrid g(13, 7, 0.2, -3.5, 1.25);
  for (std::size_t i = 0; i < g.size(); ++i) g.set(g.cell_at_index(i), static_cast<CellState>(rng() % 3));
  const auto path = std::filesystem::temp_directory_path() / "wf_planner_test.pgm";
  write_pgm(g, path);
  CHECK(read_pgm(path) == g);
  {
    std::ifstream in(path, std::ios::binary);
    std::string magic;
    in >> magic;
    CHECK(magic == "P5");
  }
  std::ofstream(path, std::ios::binary) << "P2\n1 1\n255\n0";
  CHECK_THROWS_AS(read_pgm(path), ParseError);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
  CHECK_THROWS_AS(read_pgm(path), ParseError);
}
