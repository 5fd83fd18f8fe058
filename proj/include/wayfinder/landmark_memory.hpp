#pragma once

#include "wayfinder/common.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wf::landmark {

struct Landmark {
  std::string category;
  Vec3 position = Vec3::Zero();
  double confidence = 0.0;
  std::string description;

  void validate() const;
  bool operator==(const Landmark& o) const {
    return category == o.category && position == o.position && confidence == o.confidence &&
           description == o.description;
  }
};

/// Case-folded category equality used for both fusion and queries.
bool same_category(std::string_view a, std::string_view b);

/// Merges a new detection with the stored landmarks it overlaps. Position is
/// the confidence-weighted mean, confidence the arithmetic mean, and the
/// description comes from the most confident member (newest wins ties). The
/// new landmark counts as the newest member; `overlaps` are oldest first.
Landmark fuse(const Landmark& incoming, std::span<const Landmark> overlaps);

struct InsertStats {
  std::size_t appended = 0;
  std::size_t fused = 0;
  std::size_t dropped_below_floor = 0;
};

/// Store of salient instances. Inserts are serialized; queries may run
/// concurrently with each other.
class LandmarkStore {
 public:
  static constexpr double kDefaultOverlapDistance = 1.0;
  static constexpr double kDefaultConfidenceFloor = 0.55;

  explicit LandmarkStore(double overlap_distance = kDefaultOverlapDistance,
                         double confidence_floor = kDefaultConfidenceFloor);
  LandmarkStore(const LandmarkStore& other);
  LandmarkStore& operator=(const LandmarkStore& other);

  /// Returns true when the detection was stored (appended or fused).
  bool insert(const Landmark& incoming);

  std::vector<Landmark> query_category(std::string_view category) const;
  std::vector<Landmark> landmarks() const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  double overlap_distance() const { return overlap_distance_; }
  double confidence_floor() const { return confidence_floor_; }
  InsertStats stats() const;

  nlohmann::json to_json() const;
  static LandmarkStore from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static LandmarkStore load(const std::filesystem::path& path);

 private:
  double overlap_distance_;
  double confidence_floor_;
  std::vector<Landmark> items_;
  InsertStats stats_;
  mutable std::shared_mutex mutex_;
};

}  // namespace wf::landmark
