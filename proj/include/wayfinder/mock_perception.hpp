#pragma once

#include "wayfinder/perception.hpp"

#include <cstdint>
#include <map>
#include <memory>

namespace wf::sim {
class Scene;
struct Instance;
}

namespace wf::perception {

inline constexpr std::size_t kMockFeatureDim = 64;

/// Unit vector drawn from a seeded Gaussian.
cogmap::FeatureVector identity_feature(std::uint64_t seed, std::size_t dim = kMockFeatureDim);
/// Feature shared by every patch that shows no object.
cogmap::FeatureVector background_feature(std::size_t dim = kMockFeatureDim);

/// Order-dependent 64-bit mix of several words.
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words);

/// Patch features from a label raster: object patches emit the instance's
/// identity feature plus bounded noise keyed by the image, everything else
/// the background feature. The grid is 16 patches wide.
class MockEncoder : public PatchEncoder {
 public:
  static constexpr int kPatchColumns = 16;
  static constexpr double kNoiseNorm = 0.05;

  MockEncoder(std::map<int, std::uint64_t> instance_seeds, std::uint64_t seed, std::size_t dim = kMockFeatureDim);
  static MockEncoder for_scene(const sim::Scene& scene, std::uint64_t seed);

  cogmap::PatchGrid encode(const Image& image) override;
  const cogmap::FeatureVector& identity(int instance_id) const;

 private:
  std::map<int, cogmap::FeatureVector> identities_;
  cogmap::FeatureVector background_;
  std::uint64_t seed_;
  std::size_t dim_;
};

/// Returns the simulator's oracle detections.
class MockDetector : public ObjectDetector {
 public:
  std::vector<Detection> detect(const Observation& obs) override { return obs.detections; }
};

class MockEnricher : public DescriptionEnricher {
 public:
  std::string enrich(const std::string& goal_text, std::span<const Image>) override { return goal_text; }
};

/// Renders an idealized picture of the instance a description names: an
/// ellipse of its label over background. A category name yields the
/// category's instances in id order.
class MockImaginer : public ImageImaginer {
 public:
  static constexpr int kImageSize = 224;

  explicit MockImaginer(std::shared_ptr<const sim::Scene> scene);
  std::vector<Image> imagine(const std::string& description, int count) override;

 private:
  std::shared_ptr<const sim::Scene> scene_;
};

/// Oracle judge: success when a valid goal instance is in line of sight, inside the
/// horizontal field of view and within 2 m; asks to move forward beyond 1 m.
class MockVerifier : public GoalVerifier {
 public:
  static constexpr double kSuccessRange = 2.0;
  static constexpr double kCloseRange = 1.0;

  explicit MockVerifier(std::shared_ptr<const sim::Scene> scene);
  Verification verify(const Observation& obs, const GoalSpec& goal) override;

 private:
  std::shared_ptr<const sim::Scene> scene_;
};

/// Instances that satisfy a goal: the depicted instance for image goals, an
/// exact description match for text goals, otherwise every instance whose
/// category matches.
std::vector<const sim::Instance*> goal_instances(const sim::Scene& scene, const GoalSpec& goal);

/// Deterministic offline interface set for one scene.
InterfaceSet make_mock_interfaces(std::shared_ptr<const sim::Scene> scene, std::uint64_t seed);

}  // namespace wf::perception
