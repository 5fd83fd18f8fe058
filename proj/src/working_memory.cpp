#include "wayfinder/working_memory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace wf::memory {

std::string_view to_string(CandidateSource s) {
  return s == CandidateSource::Landmark ? "landmark" : "cognitive_map";
}

nlohmann::json landmark_memory_json(const landmark::LandmarkStore& store) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : store.landmarks()) {
    out.push_back({{"label", l.category},
                   {"description", l.description},
                   {"loc", {l.position.x(), l.position.y(), l.position.z()}},
                   {"confidence", l.confidence}});
  }
  return out;
}

std::vector<CandidateGoal> retrieve_landmark_candidates(const GoalSpec& goal, const landmark::LandmarkStore& store,
                                                        perception::Reasoner& reasoner,
                                                        const perception::PromptLibrary& prompts, std::size_t k) {
  require(goal.text.has_value() && !goal.text->empty(), "landmark retrieval needs a text goal");
  require(k >= 1, "candidate count must be positive");
  const auto memory = landmark_memory_json(store);
  perception::PromptRequest req;
  req.role = perception::roles::kLandmarkRetrieval;
  req.prompt = prompts.render(req.role, {{"text_prompt", *goal.text}, {"landmark_memory", memory.dump(2)}});
  req.fields = {{"goal", *goal.text}, {"k", k}, {"landmarks", memory}};

  const std::string reply = reasoner.complete(req);
  std::vector<perception::NavLocation> locs;
  try {
    locs = perception::parse_nav_locations(reply);
  } catch (const ParseError& e) {
    throw RetrievalUnavailable(std::string("landmark retrieval reply unusable: ") + e.what());
  }
  if (locs.size() > k) locs.resize(k);

  const auto stored = store.landmarks();
  std::vector<CandidateGoal> out;
  for (const auto& loc : locs) {
    CandidateGoal c;
    c.position = loc.position;
    c.source = CandidateSource::Landmark;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : stored) {
      const double dist = (l.position - loc.position).norm();
      if (dist <= store.overlap_distance() && dist < best) {
        best = dist;
        c.p = l.confidence;
      }
    }
    out.push_back(c);
  }
  return out;
}

cogmap::FeatureVector pool_patch_features(std::span<const PooledPatch> patches, double xc, double yc, double alpha) {
  require(!patches.empty(), "pooling needs at least one patch");
  const std::size_t dim = patches.front().feature->dim();
  std::vector<double> acc(dim, 0.0);
  double wsum = 0.0;
  for (const auto& p : patches) {
    require(p.feature->dim() == dim, "pooled features must share a dimension");
    const double w = std::exp(-alpha * std::hypot(p.x - xc, p.y - yc));
    const auto v = p.feature->values();
    for (std::size_t i = 0; i < dim; ++i) acc[i] += w * v[i];
    wsum += w;
  }
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / wsum);
  return cogmap::FeatureVector(std::move(out));
}

cogmap::FeatureVector pool_patch_grid(const cogmap::PatchGrid& grid, int width, int height, double alpha) {
  std::vector<PooledPatch> patches;
  patches.reserve(grid.features.size());
  for (int i = 0; i < grid.rows; ++i)
    for (int j = 0; j < grid.cols; ++j) {
      const auto [u, v] = geometry::patch_center(i, j, grid.stride);
      patches.push_back({&grid.at(i, j), u, v});
    }
  return pool_patch_features(patches, width / 2.0, height / 2.0, alpha);
}

namespace {

std::vector<perception::Image> goal_images(const GoalSpec& goal, perception::DescriptionEnricher& enricher,
                                           perception::ImageImaginer& imaginer, int count) {
  if (goal.modality == GoalModality::ImageInstance) {
    require(goal.image.has_value(), "image goal without an image");
    return {*goal.image};
  }
  require(goal.text.has_value(), "text goal without text");
  try {
    const std::string enriched = enricher.enrich(*goal.text, {});
    return imaginer.imagine(enriched, count);
  } catch (const RetrievalUnavailable&) {
    throw;
  } catch (const std::exception& e) {
    throw RetrievalUnavailable(std::string("imagination failed: ") + e.what());
  }
}

}  // namespace

cogmap::FeatureVector goal_feature(const GoalSpec& goal, perception::DescriptionEnricher& enricher,
                                   perception::ImageImaginer& imaginer, perception::PatchEncoder& encoder,
                                   const CognitiveRetrievalParams& params) {
  const auto images = goal_images(goal, enricher, imaginer, params.images);
  std::vector<double> acc;
  for (const auto& img : images) {
    const auto f = pool_patch_grid(encoder.encode(img), img.width, img.height, params.alpha);
    if (acc.empty()) acc.assign(f.dim(), 0.0);
    for (std::size_t i = 0; i < f.dim(); ++i) acc[i] += f.values()[i] / f.norm();
  }
  std::vector<float> out(acc.begin(), acc.end());
  return cogmap::FeatureVector(std::move(out));
}

std::vector<CandidateGoal> retrieve_cognitive_candidates(const GoalSpec& goal, const cogmap::CognitiveMap& map,
                                                         perception::DescriptionEnricher& enricher,
                                                         perception::ImageImaginer& imaginer,
                                                         perception::PatchEncoder& encoder,
                                                         const CognitiveRetrievalParams& params) {
  goal.validate();
  if (map.empty()) return {};
  const auto images = goal_images(goal, enricher, imaginer, params.images);

  std::map<geometry::VoxelIndex, double> merged;
  for (const auto& img : images) {
    const auto q = pool_patch_grid(encoder.encode(img), img.width, img.height, params.alpha);
    for (const auto& m : map.query_topk(q, params.topk_voxels)) {
      auto [it, fresh] = merged.emplace(m.voxel, m.similarity);
      if (!fresh) it->second = std::max(it->second, m.similarity);
    }
  }
  std::vector<cogmap::VoxelMatch> matches;
  for (const auto& [v, s] : merged) matches.push_back({v, s});
  const auto clusters = cogmap::cluster_matches(matches, params.eps, params.min_pts, map.params().grid);

  std::vector<CandidateGoal> out;
  if (clusters.empty()) return out;
  const double floor = params.cluster_score_ratio * clusters.front().score;
  for (const auto& c : clusters) {
    if (out.size() >= params.q || c.score < floor || c.score <= 0.0) break;
    CandidateGoal g;
    g.position = c.position;
    g.p = std::clamp(c.score, 0.0, 1.0);
    g.source = CandidateSource::CognitiveMap;
    out.push_back(g);
  }
  return out;
}

std::vector<CandidateGoal> deduplicate_candidates(std::vector<CandidateGoal> cands, double radius) {
  std::vector<CandidateGoal> kept;
  for (auto& c : cands) {
    auto near = std::find_if(kept.begin(), kept.end(),
                             [&](const CandidateGoal& k) { return (k.position - c.position).norm() <= radius; });
    if (near == kept.end()) kept.push_back(std::move(c));
    else near->p = std::max(near->p, c.p);
  }
  return kept;
}

std::vector<CandidateGoal> rank_candidates(std::vector<CandidateGoal> cands, const geometry::AgentPose& start,
                                           double lambda) {
  require(!cands.empty(), "ranking needs at least one candidate");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  double d_max = 0.0;
  for (auto& c : cands) {
    require(c.p >= 0.0 && c.p <= 1.0, "existence probability must lie in [0, 1]");
    c.d = std::hypot(c.position.x() - start.x, c.position.y() - start.y);
    d_max = std::max(d_max, c.d);
  }
  for (auto& c : cands) {
    const double closeness = d_max > 0.0 ? 1.0 - c.d / d_max : 1.0;
    c.priority = lambda * c.p + (1.0 - lambda) * closeness;
  }
  std::stable_sort(cands.begin(), cands.end(), [](const CandidateGoal& a, const CandidateGoal& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.d != b.d) return a.d < b.d;
    return static_cast<int>(a.source) < static_cast<int>(b.source);
  });
  return cands;
}

}  // namespace wf::memory
