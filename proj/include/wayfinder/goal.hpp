#pragma once

#include "wayfinder/perception_types.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace wf {

enum class GoalModality { Category, TextInstance, ImageInstance, Waypoint };

std::string_view to_string(GoalModality m);
GoalModality goal_modality_from_string(std::string_view s);

/// What the agent is asked to reach.
struct GoalSpec {
  GoalModality modality = GoalModality::Category;
  std::optional<std::string> text;
  std::optional<perception::Image> image;

  static GoalSpec category(std::string name) { return {GoalModality::Category, std::move(name), {}}; }
  static GoalSpec text_instance(std::string d) { return {GoalModality::TextInstance, std::move(d), {}}; }
  static GoalSpec waypoint(std::string d) { return {GoalModality::Waypoint, std::move(d), {}}; }
  static GoalSpec image_instance(perception::Image img) {
    return {GoalModality::ImageInstance, std::nullopt, std::move(img)};
  }

  void validate() const;
  /// Short human-readable label, e.g. "category:sofa".
  std::string label() const;
};

}  // namespace wf
