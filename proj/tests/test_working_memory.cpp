#include "wayfinder/working_memory.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

using namespace wf;
using namespace wf::memory;

namespace {

cogmap::FeatureVector basis(std::size_t dim, std::size_t i, float noise = 0.0f, std::size_t j = 0) {
  std::vector<float> v(dim, 0.0f);
  v[i] = 1.0f;
  v[j] += noise;
  return cogmap::FeatureVector(v);
}

perception::Image blank(int tag) {
  perception::Image img;
  img.width = 28;
  img.height = 28;
  img.source_instance = tag;
  return img;
}

struct FixedEnricher : perception::DescriptionEnricher {
  bool fail = false;
  int calls = 0;
  std::string enrich(const std::string& text, std::span<const perception::Image>) override {
    ++calls;
    if (fail) throw RetrievalUnavailable("offline");
    return text + " enriched";
  }
};

struct TaggedImaginer : perception::ImageImaginer {
  int calls = 0;
  std::vector<perception::Image> imagine(const std::string&, int count) override {
    ++calls;
    std::vector<perception::Image> out;
    for (int i = 0; i < count; ++i) out.push_back(blank(i));
    return out;
  }
};

// Emits a 1x1 grid whose feature is chosen by the image tag.
struct TableEncoder : perception::PatchEncoder {
  std::vector<cogmap::FeatureVector> table;
  cogmap::PatchGrid encode(const perception::Image& image) override {
    const auto idx = static_cast<std::size_t>(std::max(0, image.source_instance)) % table.size();
    return cogmap::PatchGrid{1, 1, 28, {table[idx]}};
  }
};

struct BrokenEncoder : perception::PatchEncoder {
  cogmap::PatchGrid encode(const perception::Image&) override { throw std::runtime_error("encoder down"); }
};

CandidateGoal cand(double x, double y, double p, CandidateSource s = CandidateSource::Landmark) {
  CandidateGoal c;
  c.position = {x, y, 0};
  c.p = p;
  c.source = s;
  return c;
}

}  // namespace

TEST_CASE("fallback landmark retrieval returns the top-k matches") {
  landmark::LandmarkStore store;
  const double confs[] = {0.6, 0.9, 0.5, 0.7};
  for (int i = 0; i < 4; ++i) store.insert({"sofa", {3.0 * i, 0, 0.4}, confs[i], ""});
  store.insert({"table", {1.5, 5, 0.4}, 0.95, ""});
  perception::FallbackReasoner r;
  const auto prompts = perception::PromptLibrary::builtin();
  const auto c = retrieve_landmark_candidates(GoalSpec::category("sofa"), store, r, prompts, 3);
  REQUIRE(c.size() == 3);
  CHECK(c[0].p == 0.9);
  CHECK(c[1].p == 0.7);
  CHECK(c[2].p == 0.6);
  CHECK(c[0].position == Vec3(3, 0, 0.4));
  for (const auto& x : c) CHECK(x.source == CandidateSource::Landmark);

  CHECK(retrieve_landmark_candidates(GoalSpec::category("piano"), store, r, prompts).empty());
}

TEST_CASE("scripted reasoner sentinel and prompt contents") {
  landmark::LandmarkStore store;
  store.insert({"sofa", {1, 2, 0.4}, 0.8, "grey"});
  perception::ScriptedReasoner r;
  r.add(std::string(perception::roles::kLandmarkRetrieval), "Nav Loc: Unable to find");
  r.add(std::string(perception::roles::kLandmarkRetrieval), "{Nav Loc 1: [1.0, 2.0, 0.4]}");
  const auto prompts = perception::PromptLibrary::builtin();
  CHECK(retrieve_landmark_candidates(GoalSpec::text_instance("a grey sofa"), store, r, prompts).empty());
  const auto c = retrieve_landmark_candidates(GoalSpec::text_instance("a grey sofa"), store, r, prompts);
  REQUIRE(c.size() == 1);
  CHECK(c[0].p == 0.8);
  REQUIRE(r.requests().size() == 2);
  CHECK(r.requests()[0].prompt.find("a grey sofa") != std::string::npos);
  CHECK(r.requests()[0].prompt.find("grey") != std::string::npos);
  CHECK_THROWS_AS(retrieve_landmark_candidates(GoalSpec::image_instance(blank(0)), store, r, prompts),
                  ContractViolation);
}

TEST_CASE("pooling examples") {
  const auto a = basis(3, 0), b = basis(3, 1), c = basis(3, 2);
  const std::vector<PooledPatch> one{{&a, 5, 9}};
  CHECK(pool_patch_features(one, 0, 0, 0.01) == a);

  const std::vector<PooledPatch> three{{&a, 0, 0}, {&b, 100, 0}, {&c, 0, 40}};
  const auto mean = pool_patch_features(three, 0, 0, 0.0);
  for (int i = 0; i < 3; ++i) CHECK(mean.values()[i] == doctest::Approx(1.0 / 3.0));

  const std::vector<PooledPatch> sym{{&a, 10, 20}, {&b, 30, 20}};
  const auto avg = pool_patch_features(sym, 20, 20, 0.3);
  CHECK(avg.values()[0] == doctest::Approx(0.5));
  CHECK(avg.values()[1] == doctest::Approx(0.5));

  // Independent weighting oracle.
  const double alpha = 0.05;
  const auto w = pool_patch_features(three, 0, 0, alpha);
  const double wa = 1.0, wb = std::exp(-alpha * 100), wc = std::exp(-alpha * 40), s = wa + wb + wc;
  CHECK(w.values()[0] == doctest::Approx(wa / s));
  CHECK(w.values()[1] == doctest::Approx(wb / s));
  CHECK(w.values()[2] == doctest::Approx(wc / s));

  CHECK_THROWS_AS(pool_patch_features({}, 0, 0, 0.01), ContractViolation);
}

TEST_CASE("cognitive retrieval examples") {
  cogmap::CognitiveMap map(cogmap::MapParams{}, 8);
  FixedEnricher enricher;
  TaggedImaginer imaginer;
  TableEncoder encoder;
  encoder.table = {basis(8, 0)};

  CHECK(retrieve_cognitive_candidates(GoalSpec::text_instance("x"), map, enricher, imaginer, encoder).empty());

  const geometry::VoxelIndex target{520, 480, 4}, other{560, 500, 4};
  map.insert(target, basis(8, 0));
  map.insert(other, basis(8, 1));

  // Image goals bypass enrichment and imagination.
  const auto img = retrieve_cognitive_candidates(GoalSpec::image_instance(blank(0)), map, enricher, imaginer, encoder);
  REQUIRE_FALSE(img.empty());
  CHECK(img[0].p == doctest::Approx(1.0));
  CHECK((img[0].position - geometry::voxel_to_world(target, map.params().grid)).norm() < 1e-9);
  CHECK(img[0].source == CandidateSource::CognitiveMap);
  CHECK(enricher.calls == 0);
  CHECK(imaginer.calls == 0);

  // Three imagined views, all close to the same region, collapse to one candidate.
  map.insert({521, 480, 4}, basis(8, 2, 0.9f, 0));
  encoder.table = {basis(8, 0, 0.1f, 2), basis(8, 0, 0.2f, 2), basis(8, 2, 0.3f, 0)};
  const auto txt = retrieve_cognitive_candidates(GoalSpec::text_instance("a lamp"), map, enricher, imaginer, encoder);
  CHECK(enricher.calls == 1);
  CHECK(imaginer.calls == 1);
  REQUIRE(txt.size() == 1);
  const Vec3 t = geometry::voxel_to_world(target, map.params().grid);
  CHECK((txt[0].position - t).norm() < 0.2);
  CHECK(txt[0].p <= 1.0);
}

TEST_CASE("cognitive retrieval failures") {
  cogmap::CognitiveMap map(cogmap::MapParams{}, 8);
  map.insert({1, 1, 1}, basis(8, 0));
  FixedEnricher enricher;
  enricher.fail = true;
  TaggedImaginer imaginer;
  TableEncoder encoder;
  encoder.table = {basis(8, 0)};
  CHECK_THROWS_AS(retrieve_cognitive_candidates(GoalSpec::text_instance("x"), map, enricher, imaginer, encoder),
                  RetrievalUnavailable);
  BrokenEncoder broken;
  enricher.fail = false;
  CHECK_THROWS_AS(retrieve_cognitive_candidates(GoalSpec::text_instance("x"), map, enricher, imaginer, broken),
                  std::runtime_error);
}

TEST_CASE("ranking examples") {
  const geometry::AgentPose start{0, 0, 0};
  auto r = rank_candidates({cand(1, 0, 0.3), cand(5, 0, 0.9), cand(2, 0, 0.6)}, start, 1.0);
  CHECK(r[0].p == 0.9);
  CHECK(r[1].p == 0.6);
  CHECK(r[2].p == 0.3);

  r = rank_candidates({cand(4, 0, 1.0), cand(0, 0, 0.8)}, start, 0.5);
  CHECK(r[0].p == 0.8);
  CHECK(r[0].priority == doctest::Approx(0.9));
  CHECK(r[1].priority == doctest::Approx(0.5));

  r = rank_candidates({cand(3, 4, 0.4)}, start, 0.5);
  CHECK(r[0].d == doctest::Approx(5.0));
  CHECK(r[0].priority == doctest::Approx(0.2));

  // Degenerate case: every candidate at the start.
  r = rank_candidates({cand(0, 0, 0.2), cand(0, 0, 0.7)}, start, 0.5);
  CHECK(r[0].p == 0.7);
  CHECK(r[0].priority == doctest::Approx(0.85));

  // Ties: smaller distance, then landmark before cognitive.
  r = rank_candidates({cand(0, 2, 0.5, CandidateSource::CognitiveMap), cand(2, 0, 0.5), cand(0, -4, 1.0)}, start, 0.5);
  CHECK(r[0].priority == r[1].priority);
  CHECK(r[0].source == CandidateSource::Landmark);

  CHECK_THROWS_AS(rank_candidates({}, start, 0.5), ContractViolation);
  CHECK_THROWS_AS(rank_candidates({cand(1, 1, 0.5)}, start, 1.5), ContractViolation);
}

TEST_CASE("ranking properties on random pools") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 1), pos(-10, 10);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<CandidateGoal> cs;
    for (std::size_t i = 0; i < n; ++i)
      cs.push_back(cand(pos(rng), pos(rng), u(rng), rng() % 2 ? CandidateSource::Landmark : CandidateSource::CognitiveMap));
    const geometry::AgentPose start{pos(rng), pos(rng), 0};
    const double lambda = u(rng);
    const auto r = rank_candidates(cs, start, lambda);

    // Permutation.
    REQUIRE(r.size() == cs.size());
    std::multiset<double> ps_in, ps_out;
    for (const auto& c : cs) ps_in.insert(c.p);
    for (const auto& c : r) ps_out.insert(c.p);
    CHECK(ps_in == ps_out);

    // Independent priority oracle and order.
    double dmax = 0;
    for (const auto& c : cs) dmax = std::max(dmax, std::hypot(c.position.x() - start.x, c.position.y() - start.y));
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double d = std::hypot(r[i].position.x() - start.x, r[i].position.y() - start.y);
      CHECK(r[i].priority == doctest::Approx(lambda * r[i].p + (1 - lambda) * (1 - d / dmax)));
      if (i > 0) CHECK(r[i - 1].priority >= r[i].priority);
    }

    // Scale invariance about the start.
    const double k = 0.1 + 10 * u(rng);
    auto scaled = cs;
    for (auto& c : scaled) {
      c.position.x() = start.x + k * (c.position.x() - start.x);
      c.position.y() = start.y + k * (c.position.y() - start.y);
    }
    const auto rs = rank_candidates(scaled, start, lambda);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(rs[i].p == r[i].p);

    // Equal distances: order is p descending for every lambda.
    std::vector<CandidateGoal> ring;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = 2 * geometry::kPi * static_cast<double>(i) / static_cast<double>(n);
      ring.push_back(cand(start.x + 3 * std::cos(a), start.y + 3 * std::sin(a), u(rng)));
    }
    const auto rr = rank_candidates(ring, start, lambda);
    for (std::size_t i = 1; i < rr.size(); ++i) CHECK(rr[i - 1].p >= rr[i].p);
  }
}

TEST_CASE("deduplication keeps the max p and separates survivors") {
  auto d = deduplicate_candidates({cand(0, 0, 0.4), cand(0.3, 0, 0.9), cand(2, 0, 0.5)}, 0.5);
  REQUIRE(d.size() == 2);
  CHECK(d[0].position == Vec3(0, 0, 0));
  CHECK(d[0].p == 0.9);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pos(0, 3), u(0, 1);
  for (int t = 0; t < 500; ++t) {
    std::vector<CandidateGoal> cs;
    for (int i = 0; i < 12; ++i) cs.push_back(cand(pos(rng), pos(rng), u(rng)));
    const auto out = deduplicate_candidates(cs, 0.5);
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = i + 1; j < out.size(); ++j) CHECK((out[i].position - out[j].position).norm() > 0.5);
    for (const auto& c : cs) {
      const bool covered = std::any_of(out.begin(), out.end(), [&](const CandidateGoal& o) {
        return (o.position - c.position).norm() <= 0.5 && o.p >= c.p;
      });
      const bool kept = std::any_of(out.begin(), out.end(), [&](const CandidateGoal& o) { return o.position == c.position; });
      CHECK((covered || kept));
    }
  }
}
