#pragma once

#include "wayfinder/scene.hpp"

#include <memory>
#include <string>
#include <vector>

namespace wf::testing {

// Empty rectangular room with a one-cell border wall.
inline std::shared_ptr<const sim::Scene> room(std::vector<sim::Instance> instances, double width_m = 6.0,
                                              double height_m = 6.0) {
  const int w = static_cast<int>(width_m / sim::Scene::kResolution + 0.5);
  const int h = static_cast<int>(height_m / sim::Scene::kResolution + 0.5);
  std::vector<std::uint8_t> walls(static_cast<std::size_t>(w * h), 0);
  for (int x = 0; x < w; ++x) walls[static_cast<std::size_t>(x)] = walls[static_cast<std::size_t>((h - 1) * w + x)] = 1;
  for (int y = 0; y < h; ++y) walls[static_cast<std::size_t>(y * w)] = walls[static_cast<std::size_t>(y * w + w - 1)] = 1;
  return std::make_shared<const sim::Scene>(w, h, std::move(walls), std::move(instances), 7);
}

inline sim::Instance instance(int id, std::string category, double x, double y, double radius = 0.3,
                              double height = 0.8) {
  sim::Instance i;
  i.id = id;
  i.category = std::move(category);
  i.description = "the " + i.category + " " + std::to_string(id);
  i.x = x;
  i.y = y;
  i.radius = radius;
  i.height = height;
  i.feature_seed = 1000 + static_cast<std::uint64_t>(id);
  return i;
}

}  // namespace wf::testing
