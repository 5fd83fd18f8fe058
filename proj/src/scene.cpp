#include "wayfinder/scene.hpp"

#include "wayfinder/landmark_memory.hpp"
#include "wayfinder/mock_perception.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace wf::sim {

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kWallThickness = 0.25;
constexpr double kDoorWidth = 1.0;
constexpr double kMinSeparation = 1.2;
constexpr double kSameCategorySeparation = 2.5;
constexpr double kMaxIdentityCosine = 0.3;

struct CategoryShape {
  const char* name;
  double height;
};

constexpr CategoryShape kCategories[] = {
    {"sofa", 0.8},         {"chair", 0.9},      {"bed", 0.6},     {"table", 0.75}, {"potted plant", 1.0},
    {"tv monitor", 1.1},   {"toilet", 0.7},     {"cabinet", 1.2}, {"lamp", 1.5},   {"bookshelf", 1.8},
};

constexpr const char* kColors[] = {"red",   "blue",  "green", "gray",  "white",
                                   "black", "brown", "beige", "olive", "navy"};
constexpr const char* kMaterials[] = {"leather", "wooden", "fabric", "metal", "plastic", "wicker"};

struct Room {
  double x0, y0, x1, y1;
};

int to_cells(double meters) { return static_cast<int>(std::lround(meters / Scene::kResolution)); }

double pick_size(std::mt19937_64& rng, const SceneConfig& c) {
  const int steps = static_cast<int>(std::lround((c.max_room_size - c.min_room_size) / 0.5));
  return c.min_room_size + 0.5 * std::uniform_int_distribution<int>(0, steps)(rng);
}

}  // namespace

Scene::Scene(int width, int height, std::vector<std::uint8_t> walls, std::vector<Instance> instances,
             std::uint64_t seed)
    : width_(width), height_(height), seed_(seed), walls_(std::move(walls)), instances_(std::move(instances)) {
  require(width > 0 && height > 0, "scene raster must be non-empty");
  require(walls_.size() == static_cast<std::size_t>(width) * height, "wall raster size mismatch");
  std::set<int> ids;
  for (const auto& inst : instances_) {
    require(inst.id >= 1, "instance ids start at 1");
    require(ids.insert(inst.id).second, "instance ids must be unique");
    require(inst.radius > 0.0 && inst.height > 0.0, "instance shape must be positive");
  }
  rasterize();
  for (const auto& inst : instances_)
    require(!wall(fine_x(inst.x), fine_y(inst.y)), "instance placed inside a wall");
}

void Scene::rasterize() {
  solid_ = walls_;
  for (const auto& inst : instances_) {
    const int x0 = fine_x(inst.x - inst.radius), x1 = fine_x(inst.x + inst.radius);
    const int y0 = fine_y(inst.y - inst.radius), y1 = fine_y(inst.y + inst.radius);
    for (int cy = std::max(0, y0); cy <= std::min(height_ - 1, y1); ++cy) {
      for (int cx = std::max(0, x0); cx <= std::min(width_ - 1, x1); ++cx) {
        // A fine cell is solid when it overlaps the disc.
        const double nx = std::clamp(inst.x, cx * kResolution, (cx + 1) * kResolution);
        const double ny = std::clamp(inst.y, cy * kResolution, (cy + 1) * kResolution);
        if (std::hypot(nx - inst.x, ny - inst.y) < inst.radius) solid_[idx(cx, cy)] = 1;
      }
    }
  }
}

const Instance* Scene::instance(int id) const {
  for (const auto& inst : instances_)
    if (inst.id == id) return &inst;
  return nullptr;
}

std::vector<const Instance*> Scene::instances_of(std::string_view category) const {
  std::vector<const Instance*> out;
  for (const auto& inst : instances_)
    if (landmark::same_category(inst.category, category)) out.push_back(&inst);
  return out;
}

std::vector<std::string> Scene::categories() const {
  std::set<std::string> cats;
  for (const auto& inst : instances_) cats.insert(inst.category);
  return {cats.begin(), cats.end()};
}

bool Scene::solid_at(double x, double y) const { return solid(fine_x(x), fine_y(y)); }

planner::OccupancyGrid Scene::traversable_grid(double resolution) const {
  const int ratio = static_cast<int>(std::lround(resolution / kResolution));
  require(ratio >= 1 && std::abs(ratio * kResolution - resolution) < 1e-9,
          "planning resolution must be a multiple of the scene resolution");
  const int w = (width_ + ratio - 1) / ratio;
  const int h = (height_ + ratio - 1) / ratio;
  planner::OccupancyGrid grid(w, h, resolution, 0.0, 0.0, planner::CellState::Free);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool blocked = false;
      for (int fy = y * ratio; fy < (y + 1) * ratio && !blocked; ++fy)
        for (int fx = x * ratio; fx < (x + 1) * ratio && !blocked; ++fx) blocked = solid(fx, fy);
      if (blocked) grid.set({x, y}, planner::CellState::Occupied);
    }
  }
  return grid;
}

nlohmann::json Scene::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int cy = 0; cy < height_; ++cy) {
    // Alternating run lengths, starting with open floor.
    nlohmann::json runs = nlohmann::json::array();
    std::uint8_t current = 0;
    int run = 0;
    for (int cx = 0; cx < width_; ++cx) {
      const std::uint8_t v = walls_[idx(cx, cy)] ? 1 : 0;
      if (v != current) {
        runs.push_back(run);
        current = v;
        run = 0;
      }
      ++run;
    }
    runs.push_back(run);
    rows.push_back(std::move(runs));
  }
  nlohmann::json insts = nlohmann::json::array();
  for (const auto& i : instances_) {
    insts.push_back({{"id", i.id},
                     {"category", i.category},
                     {"description", i.description},
                     {"position", {i.x, i.y}},
                     {"radius", i.radius},
                     {"height", i.height},
                     {"feature_seed", i.feature_seed}});
  }
  return {{"version", kSchemaVersion}, {"seed", seed_},        {"resolution", kResolution},
          {"width", width_},           {"height", height_},    {"wall_height", kWallHeight},
          {"walls", std::move(rows)},  {"instances", std::move(insts)}};
}

Scene Scene::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != kSchemaVersion) throw ParseError("unsupported scene version");
    if (std::abs(doc.at("resolution").get<double>() - kResolution) > 1e-12)
      throw ParseError("unsupported scene resolution");
    const int w = doc.at("width").get<int>();
    const int h = doc.at("height").get<int>();
    if (w <= 0 || h <= 0) throw ParseError("scene raster must be non-empty");
    const auto& rows = doc.at("walls");
    if (rows.size() != static_cast<std::size_t>(h)) throw ParseError("wall row count mismatch");
    std::vector<std::uint8_t> walls;
    walls.reserve(static_cast<std::size_t>(w) * h);
    for (const auto& runs : rows) {
      std::uint8_t v = 0;
      std::size_t row_len = 0;
      for (const auto& r : runs) {
        const int n = r.get<int>();
        if (n < 0) throw ParseError("negative run length");
        walls.insert(walls.end(), static_cast<std::size_t>(n), v);
        row_len += static_cast<std::size_t>(n);
        v ^= 1;
      }
      if (row_len != static_cast<std::size_t>(w)) throw ParseError("wall row length mismatch");
    }
    std::vector<Instance> insts;
    for (const auto& j : doc.at("instances")) {
      Instance i;
      i.id = j.at("id").get<int>();
      i.category = j.at("category").get<std::string>();
      i.description = j.at("description").get<std::string>();
      i.x = j.at("position").at(0).get<double>();
      i.y = j.at("position").at(1).get<double>();
      i.radius = j.at("radius").get<double>();
      i.height = j.at("height").get<double>();
      i.feature_seed = j.at("feature_seed").get<std::uint64_t>();
      insts.push_back(std::move(i));
    }
    return Scene(w, h, std::move(walls), std::move(insts), doc.value("seed", std::uint64_t{0}));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed scene: ") + e.what());
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("invalid scene: ") + e.what());
  }
}

void Scene::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

Scene Scene::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed scene: ") + e.what());
  }
}

namespace {

struct Layout {
  int width = 0, height = 0;
  std::vector<std::uint8_t> walls;
  std::vector<Room> rooms;
  std::vector<std::pair<double, double>> doors;
};

Layout build_layout(std::mt19937_64& rng, const SceneConfig& cfg) {
  const int rows = std::uniform_int_distribution<int>(cfg.min_room_rows, cfg.max_room_rows)(rng);
  const int cols = std::uniform_int_distribution<int>(cfg.min_room_cols, cfg.max_room_cols)(rng);
  std::vector<double> widths(cols), heights(rows);
  for (auto& w : widths) w = pick_size(rng, cfg);
  for (auto& h : heights) h = pick_size(rng, cfg);

  std::vector<double> xw{0.0}, yw{0.0};  // lower edge of each wall band
  for (double w : widths) xw.push_back(xw.back() + kWallThickness + w);
  for (double h : heights) yw.push_back(yw.back() + kWallThickness + h);

  Layout L;
  L.width = to_cells(xw.back() + kWallThickness);
  L.height = to_cells(yw.back() + kWallThickness);
  L.walls.assign(static_cast<std::size_t>(L.width) * L.height, 0);
  auto set = [&](int cx, int cy, std::uint8_t v) { L.walls[static_cast<std::size_t>(cy) * L.width + cx] = v; };
  const int t = to_cells(kWallThickness);
  for (double x : xw)
    for (int cx = to_cells(x); cx < to_cells(x) + t; ++cx)
      for (int cy = 0; cy < L.height; ++cy) set(cx, cy, 1);
  for (double y : yw)
    for (int cy = to_cells(y); cy < to_cells(y) + t; ++cy)
      for (int cx = 0; cx < L.width; ++cx) set(cx, cy, 1);

  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      L.rooms.push_back({xw[c] + kWallThickness, yw[r] + kWallThickness, xw[c + 1], yw[r + 1]});

  // Doors: random spanning tree over adjacent rooms plus a few extra links.
  struct Edge {
    int a, b;
    bool vertical_wall;
  };
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({r * cols + c, r * cols + c + 1, true});
      if (r + 1 < rows) edges.push_back({r * cols + c, (r + 1) * cols + c, false});
    }
  std::shuffle(edges.begin(), edges.end(), rng);
  std::vector<int> parent(rows * cols);
  for (int i = 0; i < rows * cols; ++i) parent[i] = i;
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::bernoulli_distribution extra(0.3);
  for (const auto& e : edges) {
    const bool joins = find(e.a) != find(e.b);
    if (!joins && !extra(rng)) continue;
    parent[find(e.a)] = find(e.b);
    const Room& ra = L.rooms[e.a];
    // The opening spans the shared wall, away from its ends.
    const double lo = e.vertical_wall ? ra.y0 : ra.x0;
    const double hi = e.vertical_wall ? ra.y1 : ra.x1;
    const int slots = static_cast<int>(std::lround((hi - lo - kDoorWidth - 1.0) / 0.25));
    const double start = lo + 0.5 + 0.25 * std::uniform_int_distribution<int>(0, std::max(0, slots))(rng);
    if (e.vertical_wall) {
      const int cx0 = to_cells(ra.x1);
      for (int cy = to_cells(start); cy < to_cells(start + kDoorWidth); ++cy)
        for (int cx = cx0; cx < cx0 + t; ++cx) set(cx, cy, 0);
      L.doors.push_back({ra.x1 + kWallThickness / 2, start + kDoorWidth / 2});
    } else {
      const int cy0 = to_cells(ra.y1);
      for (int cx = to_cells(start); cx < to_cells(start + kDoorWidth); ++cx)
        for (int cy = cy0; cy < cy0 + t; ++cy) set(cx, cy, 0);
      L.doors.push_back({start + kDoorWidth / 2, ra.y1 + kWallThickness / 2});
    }
  }
  return L;
}

std::string placement_phrase(const Room& room, double x, double y) {
  const bool near_x = std::min(x - room.x0, room.x1 - x) < 1.0;
  const bool near_y = std::min(y - room.y0, room.y1 - y) < 1.0;
  if (near_x && near_y) return "in the corner";
  if (near_x || near_y) return "against the wall";
  return "in the middle of the room";
}

bool well_connected(const Scene& scene) {
  const auto grid = scene.traversable_grid();
  const std::size_t free = grid.count(planner::CellState::Free);
  std::vector<bool> seen(grid.size(), false);
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (seen[i] || grid.cells()[i] != planner::CellState::Free) continue;
    const auto reach = planner::reachable_cells(grid, grid.cell_at_index(i));
    std::size_t n = 0;
    for (std::size_t j = 0; j < reach.size(); ++j)
      if (reach[j]) {
        seen[j] = true;
        ++n;
      }
    best = std::max(best, n);
  }
  return best * 100 >= free * 97;
}

}  // namespace

Scene generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
  std::mt19937_64 rng(seed);
  const Layout layout = build_layout(rng, cfg);
  const auto background = perception::background_feature(cfg.feature_dim);

  for (int attempt = 0;; ++attempt) {
    std::vector<Instance> insts;
    std::vector<cogmap::FeatureVector> identities;
    std::set<std::string> descriptions;
    for (std::size_t r = 0; r < layout.rooms.size(); ++r) {
      const Room& room = layout.rooms[r];
      const int n = std::uniform_int_distribution<int>(cfg.min_instances_per_room, cfg.max_instances_per_room)(rng);
      for (int k = 0; k < n; ++k) {
        for (int tries = 0; tries < 100; ++tries) {
          const auto& shape = kCategories[std::uniform_int_distribution<std::size_t>(0, std::size(kCategories) - 1)(rng)];
          const double radius = 0.25 + 0.05 * std::uniform_int_distribution<int>(0, 3)(rng);
          const double margin = radius + 0.5;
          const double x = std::uniform_real_distribution<double>(room.x0 + margin, room.x1 - margin)(rng);
          const double y = std::uniform_real_distribution<double>(room.y0 + margin, room.y1 - margin)(rng);
          bool ok = true;
          for (const auto& o : insts) {
            const double d = std::hypot(o.x - x, o.y - y);
            if (d < kMinSeparation || (o.category == shape.name && d < kSameCategorySeparation)) ok = false;
          }
          for (const auto& [dx, dy] : layout.doors)
            if (std::hypot(dx - x, dy - y) < kMinSeparation + radius) ok = false;
          if (!ok) continue;

          std::string description;
          for (int d = 0; d < 50; ++d) {
            const char* color = kColors[std::uniform_int_distribution<std::size_t>(0, std::size(kColors) - 1)(rng)];
            const char* mat = kMaterials[std::uniform_int_distribution<std::size_t>(0, std::size(kMaterials) - 1)(rng)];
            std::string cand = std::string("a ") + color + " " + mat + " " + shape.name + " " +
                               placement_phrase(room, x, y) + " of room " + std::to_string(r + 1);
            if (descriptions.insert(cand).second) {
              description = std::move(cand);
              break;
            }
          }
          if (description.empty()) continue;

          std::uint64_t fseed = 0;
          for (;;) {
            fseed = rng();
            const auto f = perception::identity_feature(fseed, cfg.feature_dim);
            bool distinct = std::abs(cogmap::cosine_similarity(f, background)) < kMaxIdentityCosine;
            for (const auto& g : identities)
              distinct = distinct && std::abs(cogmap::cosine_similarity(f, g)) < kMaxIdentityCosine;
            if (distinct) {
              identities.push_back(f);
              break;
            }
          }
          insts.push_back({static_cast<int>(insts.size()) + 1, shape.name, std::move(description), x, y, radius,
                           shape.height, fseed});
          break;
        }
      }
    }
    Scene scene(layout.width, layout.height, layout.walls, std::move(insts), seed);
    if (attempt >= 20 || well_connected(scene)) return scene;
  }
}

double geodesic_to_any(const Scene& scene, double sx, double sy, const std::vector<Vec3>& targets, double radius) {
  const int fx = scene.fine_x(sx), fy = scene.fine_y(sy);
  if (scene.solid(fx, fy)) return kUnreachable;
  const auto field = planner::grid_dijkstra(
      scene.width(), scene.height(), [&](int x, int y) { return !scene.solid(x, y); }, {fx, fy});
  std::optional<planner::PathCost> best;
  const double r = Scene::kResolution;
  for (const auto& t : targets) {
    const int x0 = std::max(0, scene.fine_x(t.x() - radius)), x1 = std::min(scene.width() - 1, scene.fine_x(t.x() + radius));
    const int y0 = std::max(0, scene.fine_y(t.y() - radius)), y1 = std::min(scene.height() - 1, scene.fine_y(t.y() + radius));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        if (std::hypot((x + 0.5) * r - t.x(), (y + 0.5) * r - t.y()) > radius) continue;
        const auto& c = field[static_cast<std::size_t>(y) * scene.width() + x];
        if (c && (!best || *c < *best)) best = c;
      }
  }
  return best ? best->value() * r : kUnreachable;
}

double geodesic_shortest(const Scene& scene, double sx, double sy, double gx, double gy) {
  const int tx = scene.fine_x(gx), ty = scene.fine_y(gy);
  if (scene.solid(tx, ty)) return kUnreachable;
  const int fx = scene.fine_x(sx), fy = scene.fine_y(sy);
  if (scene.solid(fx, fy)) return kUnreachable;
  const auto field = planner::grid_dijkstra(
      scene.width(), scene.height(), [&](int x, int y) { return !scene.solid(x, y); }, {fx, fy});
  const auto& c = field[static_cast<std::size_t>(ty) * scene.width() + tx];
  return c ? c->value() * Scene::kResolution : kUnreachable;
}

}  // namespace wf::sim
