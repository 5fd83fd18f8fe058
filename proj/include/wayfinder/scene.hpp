#pragma once

#include "wayfinder/common.hpp"
#include "wayfinder/planner.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace wf::sim {

/// A cylindrical object standing on the floor.
struct Instance {
  int id = 0;
  std::string category;
  std::string description;
  double x = 0.0;
  double y = 0.0;
  double radius = 0.3;
  double height = 0.8;
  std::uint64_t feature_seed = 0;

  Vec3 center() const { return {x, y, height / 2.0}; }
};

struct SceneConfig {
  int min_room_rows = 1, max_room_rows = 2;
  int min_room_cols = 2, max_room_cols = 3;
  double min_room_size = 3.0, max_room_size = 5.0;
  int min_instances_per_room = 2, max_instances_per_room = 3;
  std::size_t feature_dim = 64;
};

/// Walled floor plan on a fine raster plus object instances. The raster
/// covers [0, width*resolution] x [0, height*resolution] in world meters.
class Scene {
 public:
  static constexpr double kResolution = 0.05;
  static constexpr double kWallHeight = 2.5;

  Scene() = default;
  Scene(int width, int height, std::vector<std::uint8_t> walls, std::vector<Instance> instances,
        std::uint64_t seed = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  double width_m() const { return width_ * kResolution; }
  double height_m() const { return height_ * kResolution; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Instance>& instances() const { return instances_; }
  const Instance* instance(int id) const;
  std::vector<const Instance*> instances_of(std::string_view category) const;
  std::vector<std::string> categories() const;

  bool in_bounds(int cx, int cy) const { return cx >= 0 && cy >= 0 && cx < width_ && cy < height_; }
  bool wall(int cx, int cy) const { return !in_bounds(cx, cy) || walls_[idx(cx, cy)] != 0; }
  /// Wall or object footprint.
  bool solid(int cx, int cy) const { return !in_bounds(cx, cy) || solid_[idx(cx, cy)] != 0; }
  bool solid_at(double x, double y) const;
  int fine_x(double x) const { return static_cast<int>(std::floor(x / kResolution)); }
  int fine_y(double y) const { return static_cast<int>(std::floor(y / kResolution)); }

  /// Ground-truth grid at the planning resolution: a cell is free only when
  /// none of its fine cells is solid.
  planner::OccupancyGrid traversable_grid(double resolution = 0.25) const;

  nlohmann::json to_json() const;
  static Scene from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static Scene load(const std::filesystem::path& path);

 private:
  std::size_t idx(int cx, int cy) const { return static_cast<std::size_t>(cy) * width_ + cx; }
  void rasterize();

  int width_ = 0;
  int height_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::uint8_t> walls_;
  std::vector<std::uint8_t> solid_;
  std::vector<Instance> instances_;
};

/// Seeded procedural floor plan: a grid of rooms joined by doors, furnished
/// with instances whose identity features are mutually near-orthogonal.
Scene generate_scene(std::uint64_t seed, const SceneConfig& config = {});

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Shortest 8-connected path length in meters over non-solid fine cells.
double geodesic_shortest(const Scene& scene, double sx, double sy, double gx, double gy);

/// Shortest path length from the start to any free fine cell whose center is
/// within `radius` of one of the targets.
double geodesic_to_any(const Scene& scene, double sx, double sy, const std::vector<Vec3>& targets,
                       double radius);

}  // namespace wf::sim
