#pragma once

#include "wayfinder/cognitive_map.hpp"
#include "wayfinder/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wf::perception {

/// Image exchanged between perception roles. Simulated images carry a label
/// raster (instance id per pixel, 0 for background) in place of RGB; images
/// returned by remote generators carry their encoded bytes instead.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> labels;
  /// Seeds per-image sensor noise in mock encoders.
  std::uint64_t noise_key = 0;
  std::string mime_type;
  std::string encoded;
  /// Ground-truth instance depicted, when known (simulation only).
  int source_instance = -1;

  bool has_labels() const { return !labels.empty(); }
  std::uint32_t label_at(int u, int v) const { return labels[static_cast<std::size_t>(v * width + u)]; }
};

struct Detection {
  std::string category;
  double u = 0.0;
  double v = 0.0;
  double depth_at_center = 0.0;
  double confidence = 0.0;
  std::string description;
  /// Simulator ground truth; -1 for real detectors.
  int instance_id = -1;
};

/// One sensor frame: RGB proxy, per-pixel depth, per-column range scan,
/// detections and the pose it was taken from.
struct Observation {
  geometry::AgentPose pose;
  geometry::CameraIntrinsics intrinsics;
  Image rgb;
  cogmap::DepthImage depth;
  /// Horizontal range to the first obstacle per image column. +inf: no return
  /// within the sensing range; NaN: closer than the minimum range.
  std::vector<float> depth_scan;
  std::vector<Detection> detections;
};

struct Verification {
  bool success = false;
  bool need_forward = false;
  std::string analysis;
};

}  // namespace wf::perception
