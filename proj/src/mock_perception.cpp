#include "wayfinder/mock_perception.hpp"

#include "wayfinder/landmark_memory.hpp"
#include "wayfinder/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>

namespace wf::perception {

namespace {

constexpr std::uint64_t kBackgroundSeed = 0x2545F4914F6CDD1DULL;

std::vector<float> gaussian_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  double sq = 0.0;
  for (auto& x : v) {
    x = n(rng);
    sq += x * x;
  }
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] * inv);
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::uint64_t hash_text(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x9E3779B97F4A7C15ULL;
  for (std::uint64_t w : words) {
    h ^= w + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    // splitmix64 finalizer
    h ^= h >> 30;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 27;
    h *= 0x94D049BB133111EBULL;
    h ^= h >> 31;
  }
  return h;
}

cogmap::FeatureVector identity_feature(std::uint64_t seed, std::size_t dim) {
  std::mt19937_64 rng(seed);
  return cogmap::FeatureVector(gaussian_unit(rng, dim));
}

cogmap::FeatureVector background_feature(std::size_t dim) { return identity_feature(kBackgroundSeed, dim); }

MockEncoder::MockEncoder(std::map<int, std::uint64_t> instance_seeds, std::uint64_t seed, std::size_t dim)
    : background_(background_feature(dim)), seed_(seed), dim_(dim) {
  for (const auto& [id, s] : instance_seeds) identities_.emplace(id, identity_feature(s, dim));
}

MockEncoder MockEncoder::for_scene(const sim::Scene& scene, std::uint64_t seed) {
  std::map<int, std::uint64_t> seeds;
  for (const auto& inst : scene.instances()) seeds[inst.id] = inst.feature_seed;
  return MockEncoder(std::move(seeds), seed);
}

const cogmap::FeatureVector& MockEncoder::identity(int instance_id) const {
  auto it = identities_.find(instance_id);
  if (it == identities_.end()) throw ContractViolation("unknown instance id " + std::to_string(instance_id));
  return it->second;
}

cogmap::PatchGrid MockEncoder::encode(const Image& image) {
  if (!image.has_labels()) throw Error("mock encoder needs a label raster");
  require(image.width >= kPatchColumns && image.width % kPatchColumns == 0,
          "image width must be a multiple of the patch column count");
  cogmap::PatchGrid grid;
  grid.stride = image.width / kPatchColumns;
  grid.cols = kPatchColumns;
  grid.rows = image.height / grid.stride;
  grid.features.reserve(static_cast<std::size_t>(grid.rows * grid.cols));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      const auto [uc, vc] = geometry::patch_center(i, j, grid.stride);
      const int u = std::min(image.width - 1, static_cast<int>(std::lround(uc)));
      const int v = std::min(image.height - 1, static_cast<int>(std::lround(vc)));
      const auto it = identities_.find(static_cast<int>(image.label_at(u, v)));
      if (it == identities_.end()) {
        grid.features.push_back(background_);
        continue;
      }
      std::mt19937_64 rng(hash_words({seed_, image.noise_key, static_cast<std::uint64_t>(i * grid.cols + j)}));
      const auto dir = gaussian_unit(rng, dim_);
      const double scale = kNoiseNorm * unit(rng);
      std::vector<float> values(it->second.values().begin(), it->second.values().end());
      for (std::size_t d = 0; d < dim_; ++d) values[d] += static_cast<float>(scale * dir[d]);
      grid.features.emplace_back(std::move(values));
    }
  }
  return grid;
}

std::vector<const sim::Instance*> goal_instances(const sim::Scene& scene, const GoalSpec& goal) {
  std::vector<const sim::Instance*> out;
  if (goal.modality == GoalModality::ImageInstance) {
    if (goal.image)
      if (const auto* inst = scene.instance(goal.image->source_instance)) out.push_back(inst);
    return out;
  }
  if (!goal.text) return out;
  const std::string text = lower(*goal.text);
  for (const auto& inst : scene.instances())
    if (lower(inst.description) == text) return {&inst};
  out = scene.instances_of(*goal.text);
  if (!out.empty()) return out;
  for (const auto& inst : scene.instances())
    if (text.find(lower(inst.category)) != std::string::npos) out.push_back(&inst);
  return out;
}

MockImaginer::MockImaginer(std::shared_ptr<const sim::Scene> scene) : scene_(std::move(scene)) {
  require(scene_ != nullptr, "imaginer needs a scene");
}

std::vector<Image> MockImaginer::imagine(const std::string& description, int count) {
  require(count > 0, "image count must be positive");
  const auto targets = goal_instances(*scene_, GoalSpec::text_instance(description));
  if (targets.empty()) throw RetrievalUnavailable("cannot picture \"" + description + "\"");
  std::vector<Image> out;
  const std::uint64_t key = hash_text(lower(description));
  for (int k = 0; k < count; ++k) {
    const auto* inst = targets[static_cast<std::size_t>(k) % targets.size()];
    Image img;
    img.width = img.height = kImageSize;
    img.labels.assign(static_cast<std::size_t>(kImageSize) * kImageSize, 0);
    const double a = (0.36 + 0.04 * (k % 3)) * kImageSize;
    const double b = (0.42 - 0.03 * (k % 3)) * kImageSize;
    const double cx = kImageSize / 2.0 + 6.0 * ((k % 3) - 1), cy = kImageSize / 2.0 + 4.0 * ((k % 2) ? 1 : -1);
    for (int v = 0; v < kImageSize; ++v)
      for (int u = 0; u < kImageSize; ++u) {
        const double du = (u - cx) / a, dv = (v - cy) / b;
        if (du * du + dv * dv <= 1.0) img.labels[static_cast<std::size_t>(v) * kImageSize + u] = inst->id;
      }
    img.noise_key = hash_words({key, static_cast<std::uint64_t>(k)});
    img.source_instance = inst->id;
    out.push_back(std::move(img));
  }
  return out;
}

MockVerifier::MockVerifier(std::shared_ptr<const sim::Scene> scene) : scene_(std::move(scene)) {
  require(scene_ != nullptr, "verifier needs a scene");
}

namespace {

// Clear floor-plan segment from the agent to the instance footprint; any
// other wall or object cell on the way blocks the view.
bool line_of_sight(const sim::Scene& scene, double x, double y, const sim::Instance& target) {
  const double len = std::hypot(target.x - x, target.y - y);
  const double step = sim::Scene::kResolution / 2.0;
  for (double s = 0.0; s < len; s += step) {
    const double px = x + (target.x - x) * s / len, py = y + (target.y - y) * s / len;
    if (std::hypot(px - target.x, py - target.y) <= target.radius + sim::Scene::kResolution) return true;
    if (scene.solid_at(px, py)) return false;
  }
  return true;
}

}  // namespace

Verification MockVerifier::verify(const Observation& obs, const GoalSpec& goal) {
  Verification best;
  best.analysis = "target not in view";
  double best_dist = std::numeric_limits<double>::infinity();
  const double half_fov = std::atan((obs.intrinsics.width / 2.0) / obs.intrinsics.fx);
  for (const auto* inst : goal_instances(*scene_, goal)) {
    const double dist = std::hypot(inst->x - obs.pose.x, inst->y - obs.pose.y);
    const double bearing = geometry::normalize_angle(std::atan2(inst->y - obs.pose.y, inst->x - obs.pose.x) - obs.pose.yaw);
    if (std::abs(bearing) > half_fov || dist > kSuccessRange || dist >= best_dist) continue;
    if (!line_of_sight(*scene_, obs.pose.x, obs.pose.y, *inst)) continue;
    best_dist = dist;
    best.success = true;
    best.need_forward = dist > kCloseRange;
    best.analysis = "target " + inst->category + " visible at " + std::to_string(dist) + " m";
  }
  return best;
}

InterfaceSet make_mock_interfaces(std::shared_ptr<const sim::Scene> scene, std::uint64_t seed) {
  require(scene != nullptr, "mock interfaces need a scene");
  InterfaceSet set;
  set.detector = std::make_shared<MockDetector>();
  set.encoder = std::make_shared<MockEncoder>(MockEncoder::for_scene(*scene, seed));
  set.enricher = std::make_shared<MockEnricher>();
  set.imaginer = std::make_shared<MockImaginer>(scene);
  set.verifier = std::make_shared<MockVerifier>(scene);
  set.scorer = std::make_shared<ExactMatchScorer>();
  set.reasoner = std::make_shared<FallbackReasoner>();
  return set;
}

}  // namespace wf::perception
