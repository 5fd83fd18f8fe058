#include "wayfinder/agent.hpp"
#include "wayfinder/cognitive_map.hpp"
#include "wayfinder/mock_perception.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

using namespace wf;
using namespace wf::cogmap;

namespace {

FeatureVector basis(std::size_t dim, std::size_t i) {
  std::vector<float> v(dim, 0.0f);
  v[i] = 1.0f;
  return FeatureVector(v);
}

FeatureVector random_feature(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (auto& x : v) x = u(rng);
  return FeatureVector(v);
}

// Independent reference for the cosine score, computed from raw floats.
double ref_cos(const FeatureVector& a, const FeatureVector& b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    ab += static_cast<long double>(a.values()[i]) * b.values()[i];
    aa += static_cast<long double>(a.values()[i]) * a.values()[i];
    bb += static_cast<long double>(b.values()[i]) * b.values()[i];
  }
  return static_cast<double>(ab / std::sqrt(aa * bb));
}

struct RefEntry {
  FeatureVector f;
  double s;
  std::uint64_t tick;
};

// Straight-line simulation of the gated buffer used as an oracle.
struct RefMap {
  std::map<VoxelIndex, std::vector<RefEntry>> cells;
  std::size_t cap;
  double tau;
  int hop;
  std::uint64_t tick = 0;

  double surprise(const FeatureVector& f, const VoxelIndex& v) const {
    double sum = 0;
    int n = 0;
    for (const auto& [k, list] : cells) {
      if (std::abs(k.vx - v.vx) > hop || std::abs(k.vy - v.vy) > hop || std::abs(k.vz - v.vz) > hop) continue;
      for (const auto& e : list) {
        sum += std::clamp(1.0 - ref_cos(f, e.f), 0.0, 1.0);
        ++n;
      }
    }
    return n == 0 ? 1.0 : sum / n;
  }

  bool insert(const VoxelIndex& v, const FeatureVector& f) {
    const double s = surprise(f, v);
    if (!(s > tau)) return false;
    auto& list = cells[v];
    if (list.size() == cap) {
      std::size_t worst = 0;
      for (std::size_t i = 1; i < list.size(); ++i)
        if (list[i].s < list[worst].s) worst = i;
      list.erase(list.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    list.push_back({f, s, tick++});
    return true;
  }
};

}  // namespace

TEST_CASE("surprise examples") {
  CognitiveMap m(MapParams{}, 4);
  const VoxelIndex v{500, 500, 5};
  const auto f = basis(4, 0);
  CHECK(m.surprise(f, v) == 1.0);
  REQUIRE(m.insert(v, f).inserted);
  CHECK(m.surprise(f, v) == doctest::Approx(0.0));
  REQUIRE(m.insert(v, basis(4, 1)).inserted);
  CHECK(m.surprise(f, v) == doctest::Approx(0.5));
  // Neighbor cell within one hop contributes; two hops away does not.
  CHECK(m.surprise(f, {501, 499, 6}) == doctest::Approx(0.5));
  CHECK(m.surprise(f, {502, 500, 5}) == 1.0);
}

TEST_CASE("feature and map contracts") {
  CHECK_THROWS_AS(FeatureVector(std::vector<float>{0, 0}), ContractViolation);
  CHECK_THROWS_AS(FeatureVector(std::vector<float>{1, NAN}), ContractViolation);
  CognitiveMap m(MapParams{}, 4);
  CHECK_THROWS_AS(m.insert({0, 0, 0}, basis(3, 0)), ContractViolation);
  CHECK_THROWS_AS(m.insert({-1, 0, 0}, basis(4, 0)), OutOfBounds);
  CHECK_THROWS_AS(m.query_topk(basis(4, 0), 0), ContractViolation);
  MapParams bad;
  bad.buffer_capacity = 0;
  CHECK_THROWS_AS(CognitiveMap(bad, 4), ContractViolation);
}

TEST_CASE("full cell evicts the minimum stored surprise") {
  MapParams p;
  CognitiveMap m(p, 16);
  const VoxelIndex v{10, 10, 1};
  for (std::size_t i = 0; i <= p.buffer_capacity; ++i) m.insert(v, basis(16, i));
  const auto buf = m.buffer(v);
  CHECK(buf.size() == p.buffer_capacity);
  // Every entry scored 1.0 on insert; the oldest is the one removed.
  CHECK(std::none_of(buf.begin(), buf.end(), [](const auto& b) { return b.tick == 0; }));

  // Non-uniform surprises, checked against the reference simulation.
  std::mt19937_64 rng(5);
  MapParams q;
  q.tau = 0.05;
  q.buffer_capacity = 4;
  CognitiveMap mm(q, 8);
  RefMap ref{{}, q.buffer_capacity, q.tau, q.hop};
  for (int i = 0; i < 300; ++i) {
    const auto f = random_feature(rng, 8);
    const auto out = mm.insert(v, f);
    CHECK(out.inserted == ref.insert(v, f));
  }
  const auto got = mm.buffer(v);
  const auto& want = ref.cells[v];
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].feature == want[i].f);
    CHECK(got[i].surprise_at_insert == doctest::Approx(want[i].s).epsilon(1e-9));
  }
}

TEST_CASE("random insert sequences match the reference and respect capacity") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    MapParams p;
    p.buffer_capacity = 1 + rng() % 5;
    p.tau = 0.1 + 0.05 * static_cast<double>(rng() % 6);
    p.hop = static_cast<int>(rng() % 2);
    CognitiveMap m(p, 6);
    RefMap ref{{}, p.buffer_capacity, p.tau, p.hop};
    for (int i = 0; i < 200; ++i) {
      const VoxelIndex v{static_cast<int>(rng() % 4), static_cast<int>(rng() % 4), static_cast<int>(rng() % 2)};
      const auto f = random_feature(rng, 6);
      const double s = m.surprise(f, v);
      CHECK(s == doctest::Approx(ref.surprise(f, v)).epsilon(1e-9));
      const auto out = m.insert(v, f);
      CHECK(out.inserted == (s > p.tau));
      CHECK(out.inserted == ref.insert(v, f));
      for (const auto& c : m.voxels()) CHECK(m.buffer(c).size() <= p.buffer_capacity);
    }
    for (const auto& c : m.voxels()) {
      const auto buf = m.buffer(c);
      for (const auto& b : buf) CHECK(b.surprise_at_insert > p.tau);
    }
  }
}

TEST_CASE("integrate skips invalid depth and is idempotent on a synthetic frame") {
  const auto k = geometry::CameraIntrinsics::from_fov(28, 28, geometry::kPi / 2);
  const auto mount = geometry::forward_camera_mount(1.0);
  PatchGrid pg{2, 2, 14, {basis(4, 0), basis(4, 1), basis(4, 2), basis(4, 3)}};
  DepthImage depth{28, 28, std::vector<float>(28 * 28, 1.5f)};
  depth.values[7 * 28 + 7] = 0.0f;
  CognitiveMap m(MapParams{}, 4);
  const auto s1 = m.integrate(pg, depth, {0, 0, 0}, k, mount);
  CHECK(s1.rejected == 1);
  CHECK(s1.inserted == 3);
  const auto snapshot = m;
  const auto s2 = m.integrate(pg, depth, {0, 0, 0}, k, mount);
  CHECK(s2.inserted == 0);
  CHECK(s2.rejected == 1);
  CHECK(m == snapshot);

  // Points projected outside the grid are skipped.
  MapParams tiny;
  tiny.grid.g = 4;
  CognitiveMap t(tiny, 4);
  const auto s3 = t.integrate(pg, depth, {30, 30, 0}, k, mount);
  CHECK(s3.inserted == 0);
  CHECK(s3.rejected == 4);
}

TEST_CASE("integrate is idempotent on simulator observations") {
  std::size_t first = 0, second = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto scene = std::make_shared<const sim::Scene>(sim::generate_scene(seed));
    auto io = perception::make_mock_interfaces(scene, seed);
    agent::AgentConfig cfg;
    const auto grid = scene->traversable_grid(0.25);
    std::vector<planner::Cell> free;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid.cells()[i] == planner::CellState::Free) free.push_back(grid.cell_at_index(i));
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 10; ++t) {
      const auto [x, y] = grid.center(free[rng() % free.size()]);
      sim::GridWorld w(scene, cfg.sim, geometry::AgentPose{x, y, static_cast<double>(rng() % 12) * geometry::kPi / 6},
                       seed);
      const auto obs = w.observe();
      const auto patches = io.encoder->encode(obs.rgb);
      CognitiveMap m(cfg.map);
      first += m.integrate(patches, obs.depth, obs.pose, obs.intrinsics, cfg.sim.camera_mount()).inserted;
      const auto snapshot = m;
      second += m.integrate(patches, obs.depth, obs.pose, obs.intrinsics, cfg.sim.camera_mount()).inserted;
      CHECK(m == snapshot);
    }
  }
  CHECK(first > 0);
  CHECK(second == 0);
}

TEST_CASE("query_topk examples") {
  CognitiveMap m(MapParams{}, 4);
  CHECK(m.query_topk(basis(4, 0), 3).empty());
  const VoxelIndex a{1, 2, 3}, b{1, 2, 9};
  m.insert(b, basis(4, 1));
  m.insert(a, basis(4, 0));
  auto r = m.query_topk(basis(4, 0), 1);
  REQUIRE(r.size() == 1);
  CHECK(r[0].voxel == a);
  CHECK(r[0].similarity == doctest::Approx(1.0));
  r = m.query_topk(FeatureVector(std::vector<float>{1, 1, 0, 0}), 5);
  REQUIRE(r.size() == 2);
  CHECK(r[0].voxel == a);
  CHECK(r[1].voxel == b);
  CHECK(r[0].similarity == doctest::Approx(std::sqrt(0.5)));
  CHECK(r[1].similarity == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("query_topk equals an exhaustive scan") {
  std::mt19937_64 rng(3);
  MapParams p;
  p.tau = 0.0;
  p.hop = 0;
  CognitiveMap m(p, 8);
  std::map<VoxelIndex, std::vector<FeatureVector>> all;
  while (m.feature_count() < 10000) {
    const VoxelIndex v{static_cast<int>(rng() % 40), static_cast<int>(rng() % 40), static_cast<int>(rng() % 2)};
    // Signed entries so every draw differs from its neighbors.
    std::normal_distribution<float> n(0, 1);
    std::vector<float> x(8);
    for (auto& e : x) e = n(rng);
    FeatureVector f(x);
    const auto out = m.insert(v, f);
    if (out.inserted) all[v].push_back(f);
    if (out.evicted) {
      auto& list = all[v];
      list.erase(std::find(list.begin(), list.end(), out.evicted->feature));
    }
  }
  for (int q = 0; q < 20; ++q) {
    const auto query = random_feature(rng, 8);
    std::vector<VoxelMatch> scan;
    for (const auto& [v, list] : all) {
      if (list.empty()) continue;
      double best = -2;
      for (const auto& f : list) best = std::max(best, cosine_similarity(query, f));
      scan.push_back({v, best});
    }
    std::stable_sort(scan.begin(), scan.end(), [](auto& x, auto& y) { return x.similarity > y.similarity; });
    const std::size_t k = 1 + rng() % 50;
    const auto got = m.query_topk(query, k);
    REQUIRE(got.size() == std::min(k, scan.size()));
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].voxel == scan[i].voxel);
      CHECK(got[i].similarity == scan[i].similarity);
    }
  }
}

TEST_CASE("cluster_matches examples") {
  GridParams gp;
  CHECK(cluster_matches({}, 3, 1, gp).empty());
  const std::vector<VoxelMatch> one{{{10, 20, 3}, 0.7}};
  auto c = cluster_matches(one, 3, 1, gp);
  REQUIRE(c.size() == 1);
  CHECK(c[0].position == geometry::voxel_to_world({10, 20, 3}, gp));
  CHECK(c[0].score == 0.7);

  const std::vector<VoxelMatch> pair{{{10, 20, 3}, 0.9}, {{11, 20, 3}, 0.8}};
  c = cluster_matches(pair, 3, 1, gp);
  REQUIRE(c.size() == 1);
  const double vx = (10.5 * 0.9 + 11.5 * 0.8) / 1.7;
  CHECK(vx == doctest::Approx(10.97).epsilon(1e-3));
  CHECK(c[0].position.x() == doctest::Approx((vx - gp.g / 2.0) * gp.delta));
  CHECK(c[0].score == 0.9);
  CHECK(c[0].members == 2);

  const std::vector<VoxelMatch> apart{{{10, 20, 3}, 0.6}, {{60, 20, 3}, 0.8}};
  c = cluster_matches(apart, 3, 1, gp);
  REQUIRE(c.size() == 2);
  CHECK(c[0].score == 0.8);
  CHECK(c[1].score == 0.6);
  CHECK_THROWS_AS(cluster_matches(apart, 0, 1, gp), ContractViolation);
}

TEST_CASE("clusters chain through Chebyshev neighbors") {
  GridParams gp;
  const std::vector<VoxelMatch> chain{{{0, 0, 0}, 0.5}, {{3, 3, 3}, 0.5}, {{6, 6, 0}, 0.5}, {{10, 6, 0}, 0.9}};
  const auto c = cluster_matches(chain, 3, 1, gp);
  REQUIRE(c.size() == 2);
  CHECK(c[0].members == 1);
  CHECK(c[1].members == 3);
}

TEST_CASE("binary round trip is exact") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    MapParams p;
    p.tau = 0.2;
    CognitiveMap m(p, 5);
    for (int i = 0; i < 500; ++i)
      m.insert({static_cast<int>(rng() % 10), static_cast<int>(rng() % 10), static_cast<int>(rng() % 3)},
               random_feature(rng, 5));
    std::stringstream ss;
    m.write_binary(ss);
    const auto back = CognitiveMap::read_binary(ss);
    CHECK(back == m);
    CHECK(back.params() == m.params());
    for (const auto& v : m.voxels()) CHECK(back.buffer(v) == m.buffer(v));
  }
  std::stringstream bad("XXXX");
  CHECK_THROWS_AS(CognitiveMap::read_binary(bad), ParseError);
  CognitiveMap m(MapParams{}, 2);
  m.insert({1, 1, 1}, basis(2, 0));
  std::stringstream ss;
  m.write_binary(ss);
  const auto bytes = ss.str();
  std::stringstream trunc(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(CognitiveMap::read_binary(trunc), ParseError);
  CHECK(bytes.substr(0, 4) == "BSCM");
}

TEST_CASE("occupancy csv export") {
  CognitiveMap m(MapParams{}, 2);
  m.insert({1, 2, 3}, basis(2, 0));
  m.insert({1, 2, 3}, basis(2, 1));
  std::ostringstream out;
  m.write_occupancy_csv(out);
  CHECK(out.str() == "vx,vy,vz,count,max_tick\n1,2,3,2,1\n");
}
