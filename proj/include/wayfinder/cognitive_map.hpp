#pragma once

#include "wayfinder/common.hpp"
#include "wayfinder/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

namespace wf::cogmap {

using geometry::GridParams;
using geometry::VoxelIndex;

/// Visual feature with finite entries and non-zero norm.
class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::vector<float> values);

  std::span<const float> values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  double norm() const { return norm_; }
  bool operator==(const FeatureVector& o) const { return values_ == o.values_; }

 private:
  std::vector<float> values_;
  double norm_ = 0.0;
};

double dot(const FeatureVector& a, const FeatureVector& b);
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);
/// 1 - cosine similarity, clamped to [0, 1].
double cosine_distance(const FeatureVector& a, const FeatureVector& b);

struct BufferedFeature {
  FeatureVector feature;
  double surprise_at_insert = 0.0;
  std::uint64_t tick = 0;

  bool operator==(const BufferedFeature&) const = default;
};

struct VoxelMatch {
  VoxelIndex voxel;
  double similarity = 0.0;
};

struct ClusterCenter {
  Vec3 position = Vec3::Zero();
  double score = 0.0;
  std::size_t members = 0;
};

struct MapParams {
  GridParams grid;
  std::size_t buffer_capacity = 10;
  double tau = 0.5;
  int hop = 1;

  void validate() const;
  bool operator==(const MapParams&) const = default;
};

/// Patch-level features of one image, row-major over a rows x cols grid.
struct PatchGrid {
  int rows = 0;
  int cols = 0;
  int stride = 0;
  std::vector<FeatureVector> features;

  const FeatureVector& at(int i, int j) const { return features[static_cast<std::size_t>(i * cols + j)]; }
};

/// Per-pixel optical-axis depth in meters, row-major. Non-finite or
/// non-positive entries mark invalid pixels.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  float at(int u, int v) const { return values[static_cast<std::size_t>(v * width + u)]; }
};

struct InsertOutcome {
  bool inserted = false;
  double surprise = 0.0;
  std::optional<BufferedFeature> evicted;
};

struct IntegrateStats {
  std::size_t inserted = 0;
  std::size_t gated = 0;
  std::size_t rejected = 0;
  std::size_t evicted = 0;

  IntegrateStats& operator+=(const IntegrateStats& o) {
    inserted += o.inserted;
    gated += o.gated;
    rejected += o.rejected;
    evicted += o.evicted;
    return *this;
  }
};

/// Sparse voxel map where each voxel buffers up to B features. New features
/// are admitted only when their surprise against the n-hop neighborhood
/// exceeds tau; a full buffer drops its lowest stored surprise.
///
/// One writer at a time; concurrent readers see either none or all of an
/// integration.
class CognitiveMap {
 public:
  using Cells = std::unordered_map<VoxelIndex, std::vector<BufferedFeature>, geometry::VoxelIndexHash>;

  explicit CognitiveMap(MapParams params = {}, std::size_t feature_dim = 0);
  CognitiveMap(const CognitiveMap& other);
  CognitiveMap& operator=(const CognitiveMap& other);

  const MapParams& params() const { return params_; }
  std::size_t feature_dim() const;
  std::size_t voxel_count() const;
  std::size_t feature_count() const;
  bool empty() const { return feature_count() == 0; }

  double surprise(const FeatureVector& f, const VoxelIndex& v) const;

  /// Gate-and-insert of a single feature at a voxel.
  InsertOutcome insert(const VoxelIndex& v, const FeatureVector& f);

  /// Projects every patch with valid depth into the map and applies the
  /// surprise gate. Invalid depth and out-of-grid projections are counted in
  /// `rejected`.
  IntegrateStats integrate(const PatchGrid& patches, const DepthImage& depth,
                           const geometry::AgentPose& pose, const geometry::CameraIntrinsics& k,
                           const geometry::RigidTransform& t_base_cam, double z_base = 0.0);

  /// Up to k voxels ranked by their best buffered cosine similarity to q;
  /// ties ordered by voxel index.
  std::vector<VoxelMatch> query_topk(const FeatureVector& q, std::size_t k) const;

  /// Copy of one voxel's buffer (empty when unpopulated).
  std::vector<BufferedFeature> buffer(const VoxelIndex& v) const;
  /// All populated voxels in index order.
  std::vector<VoxelIndex> voxels() const;

  void write_binary(std::ostream& out) const;
  static CognitiveMap read_binary(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static CognitiveMap load(const std::filesystem::path& path);
  /// Debug export: one row per voxel with `vx,vy,vz,count,max_tick`.
  void write_occupancy_csv(std::ostream& out) const;

  bool operator==(const CognitiveMap& other) const;

 private:
  double surprise_locked(const FeatureVector& f, const VoxelIndex& v) const;
  InsertOutcome insert_locked(const VoxelIndex& v, const FeatureVector& f);
  void check_dim(const FeatureVector& f);

  MapParams params_;
  std::size_t dim_;
  std::uint64_t next_tick_ = 0;
  std::size_t feature_count_ = 0;
  Cells cells_;
  mutable std::shared_mutex mutex_;
};

/// DBSCAN over voxel coordinates (Chebyshev metric). Each cluster becomes the
/// similarity-weighted centroid of its member voxel centers in world
/// coordinates, scored by its best member; output sorted by score.
std::vector<ClusterCenter> cluster_matches(std::span<const VoxelMatch> matches, int eps,
                                           std::size_t min_pts, const GridParams& gp);

}  // namespace wf::cogmap
