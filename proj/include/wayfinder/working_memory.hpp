#pragma once

#include "wayfinder/cognitive_map.hpp"
#include "wayfinder/goal.hpp"
#include "wayfinder/landmark_memory.hpp"
#include "wayfinder/perception.hpp"
#include "wayfinder/prompts.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace wf::memory {

enum class CandidateSource { Landmark = 0, CognitiveMap = 1 };
std::string_view to_string(CandidateSource s);

struct CandidateGoal {
  Vec3 position = Vec3::Zero();
  /// Existence probability in [0, 1].
  double p = 0.0;
  /// Horizontal distance from the start pose; set by rank_candidates.
  double d = 0.0;
  double priority = 0.0;
  CandidateSource source = CandidateSource::Landmark;
};

/// Asks the reasoner for up to k goal locations over the serialized store.
/// Each returned location takes the confidence of the nearest stored
/// landmark within the store's overlap distance (0 when none is that close).
std::vector<CandidateGoal> retrieve_landmark_candidates(const GoalSpec& goal, const landmark::LandmarkStore& store,
                                                        perception::Reasoner& reasoner,
                                                        const perception::PromptLibrary& prompts, std::size_t k = 3);

struct PooledPatch {
  const cogmap::FeatureVector* feature;
  double x;
  double y;
};

/// Weighted mean with w = exp(-alpha * distance to the image center).
cogmap::FeatureVector pool_patch_features(std::span<const PooledPatch> patches, double xc, double yc, double alpha);

/// Pools a whole patch grid around the center of a width x height image.
cogmap::FeatureVector pool_patch_grid(const cogmap::PatchGrid& grid, int width, int height, double alpha);

struct CognitiveRetrievalParams {
  std::size_t q = 3;
  int images = 3;
  double alpha = 0.01;
  std::size_t topk_voxels = 32;
  int eps = 3;
  std::size_t min_pts = 1;
  /// Clusters scoring below this fraction of the best cluster are dropped.
  double cluster_score_ratio = 0.75;
};

/// Imagine-then-localize retrieval. Text goals are enriched and rendered to
/// `images` pictures; image goals are used as-is. Matches from all pictures
/// are merged per voxel (best similarity) before clustering.
std::vector<CandidateGoal> retrieve_cognitive_candidates(const GoalSpec& goal, const cogmap::CognitiveMap& map,
                                                         perception::DescriptionEnricher& enricher,
                                                         perception::ImageImaginer& imaginer,
                                                         perception::PatchEncoder& encoder,
                                                         const CognitiveRetrievalParams& params = {});

/// Pooled query feature of a goal: the encoded goal image, or the enriched
/// and imagined pictures of a text goal averaged after normalization.
cogmap::FeatureVector goal_feature(const GoalSpec& goal, perception::DescriptionEnricher& enricher,
                                   perception::ImageImaginer& imaginer, perception::PatchEncoder& encoder,
                                   const CognitiveRetrievalParams& params = {});

/// Folds each candidate within `radius` of an earlier kept one into it,
/// keeping the larger p.
std::vector<CandidateGoal> deduplicate_candidates(std::vector<CandidateGoal> cands, double radius = 0.5);

/// Priority H = lambda*p + (1-lambda)*(1 - d/d_max), highest first; ties by
/// smaller d, then landmark before cognitive, then input order.
std::vector<CandidateGoal> rank_candidates(std::vector<CandidateGoal> cands, const geometry::AgentPose& start,
                                           double lambda = 0.5);

/// Landmark list in the layout the retrieval prompt describes.
nlohmann::json landmark_memory_json(const landmark::LandmarkStore& store);

}  // namespace wf::memory
