#include "wayfinder/landmark_memory.hpp"

#include <doctest.h>
#include <Eigen/Geometry>

#include <algorithm>
#include <filesystem>
#include <random>

using namespace wf;
using namespace wf::landmark;

namespace {

Landmark lm(std::string cat, Vec3 p, double conf, std::string desc = "") {
  return Landmark{std::move(cat), p, conf, std::move(desc)};
}

bool in_hull_of_two_or_more(const Vec3& p, const std::vector<Vec3>& pts) {
  // Axis-aligned bounding box of the inputs contains every convex combination.
  for (int a = 0; a < 3; ++a) {
    double lo = pts[0][a], hi = pts[0][a];
    for (const auto& q : pts) {
      lo = std::min(lo, q[a]);
      hi = std::max(hi, q[a]);
    }
    if (p[a] < lo - 1e-12 || p[a] > hi + 1e-12) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("fuse weighted example") {
  const std::vector<Landmark> existing{lm("sofa", {0, 0, 0}, 0.6, "old")};
  const auto f = fuse(lm("sofa", {1, 0, 0}, 0.8, "new"), existing);
  CHECK(f.position.x() == doctest::Approx(0.8 / 1.4));
  CHECK(f.position.y() == 0.0);
  CHECK(f.confidence == doctest::Approx(0.7));
  CHECK(f.description == "new");
  CHECK(f.category == "sofa");
}

TEST_CASE("fuse self and midpoint") {
  const auto l = lm("chair", {1.25, -3.5, 0.75}, 0.73, "d");
  const std::vector<Landmark> same{l};
  const auto f = fuse(l, same);
  CHECK(f.position == l.position);
  CHECK(f.confidence == l.confidence);
  const std::vector<Landmark> left{lm("bed", {0, 0, 0}, 0.5)};
  const auto m = fuse(lm("bed", {2, 0, 0}, 0.5), left);
  CHECK(m.position.x() == doctest::Approx(1.0));
  CHECK(m.confidence == 0.5);
}

TEST_CASE("fuse contract") {
  CHECK_THROWS_AS(fuse(lm("sofa", {0, 0, 0}, 0.6), std::span<const Landmark>{}), ContractViolation);
  const std::vector<Landmark> other{lm("table", {0, 0, 0}, 0.6)};
  CHECK_THROWS_AS(fuse(lm("sofa", {0, 0, 0}, 0.6), other), ContractViolation);
}

TEST_CASE("fuse ties keep the newer description") {
  const std::vector<Landmark> existing{lm("lamp", {0, 0, 0}, 0.7, "old")};
  CHECK(fuse(lm("lamp", {0.2, 0, 0}, 0.7, "new"), existing).description == "new");
}

TEST_CASE("insert examples") {
  LandmarkStore s;
  s.insert(lm("sofa", {0, 0, 0}, 0.9));
  s.insert(lm("sofa", {1.5, 0, 0}, 0.9));
  CHECK(s.size() == 2);
  s.insert(lm("table", {0, 0, 0}, 0.9));
  CHECK(s.size() == 3);

  LandmarkStore t;
  t.insert(lm("sofa", {0, 0, 0}, 0.6, "a"));
  t.insert(lm("sofa", {0.5, 0, 0}, 0.8, "b"));
  REQUIRE(t.size() == 1);
  const auto only = t.landmarks()[0];
  CHECK(only.position.x() == doctest::Approx(0.5 * 0.8 / 1.4));
  CHECK(only.confidence == doctest::Approx(0.7));
  CHECK(only.description == "b");
  CHECK(t.stats().fused == 1);
}

TEST_CASE("insert drops detections below the floor") {
  LandmarkStore s;
  CHECK_FALSE(s.insert(lm("sofa", {0, 0, 0}, 0.54)));
  CHECK(s.insert(lm("sofa", {0, 0, 0}, 0.55)));
  CHECK(s.size() == 1);
  CHECK(s.stats().dropped_below_floor == 1);
  CHECK_THROWS_AS(s.insert(lm("", {0, 0, 0}, 0.9)), ContractViolation);
  CHECK_THROWS_AS(s.insert(lm("sofa", {0, 0, 0}, 1.2)), ContractViolation);
}

TEST_CASE("insert cascades fusion until the store is consistent") {
  LandmarkStore s;
  s.insert(lm("cup", {0, 0, 0}, 0.9));
  s.insert(lm("cup", {2.0, 0, 0}, 0.9));
  REQUIRE(s.size() == 2);
  s.insert(lm("cup", {1.0, 0, 0}, 0.9));
  REQUIRE(s.size() == 1);
  CHECK(s.landmarks()[0].position.x() == doctest::Approx(1.0));
  CHECK(s.stats().fused == 1);
}

TEST_CASE("overlap boundary is inclusive") {
  LandmarkStore s;
  s.insert(lm("cup", {0, 0, 0}, 0.9));
  s.insert(lm("cup", {1.0, 0, 0}, 0.9));
  CHECK(s.size() == 1);
  s.insert(lm("cup", {2.5000001, 0, 0}, 0.9));
  CHECK(s.size() == 2);
}

TEST_CASE("query_category sorts by confidence with stable ties") {
  LandmarkStore s;
  s.insert(lm("Sofa", {0, 0, 0}, 0.7, "first"));
  s.insert(lm("sofa", {5, 0, 0}, 0.9, "second"));
  s.insert(lm("SOFA", {10, 0, 0}, 0.7, "third"));
  s.insert(lm("table", {20, 0, 0}, 0.99));
  const auto q = s.query_category("sofa");
  REQUIRE(q.size() == 3);
  CHECK(q[0].description == "second");
  CHECK(q[1].description == "first");
  CHECK(q[2].description == "third");
  CHECK(s.query_category("piano").empty());
}

TEST_CASE("store invariant holds after random insert sequences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0, 6), conf(0.4, 1.0);
  const char* cats[] = {"sofa", "chair", "bed"};
  for (int trial = 0; trial < 200; ++trial) {
    LandmarkStore s;
    for (int i = 0; i < 40; ++i) s.insert(lm(cats[rng() % 3], {pos(rng), pos(rng), pos(rng) / 4}, conf(rng)));
    const auto all = s.landmarks();
    for (std::size_t i = 0; i < all.size(); ++i) {
      CHECK(all[i].confidence >= s.confidence_floor());
      for (std::size_t j = i + 1; j < all.size(); ++j)
        if (same_category(all[i].category, all[j].category))
          CHECK((all[i].position - all[j].position).norm() > s.overlap_distance());
    }
  }
}

TEST_CASE("fusion algebra on random pairs") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pos(-10, 10), conf(0.0, 1.0);
  for (int t = 0; t < 10000; ++t) {
    const auto a = lm("x", {pos(rng), pos(rng), pos(rng)}, conf(rng));
    const auto b = lm("x", {pos(rng), pos(rng), pos(rng)}, conf(rng));
    const std::vector<Landmark> ov{a};
    const auto f = fuse(b, ov);
    CHECK(f.confidence == (a.confidence + b.confidence) / 2.0);
    CHECK(in_hull_of_two_or_more(f.position, {a.position, b.position}));
    // Collinearity: the fused point lies on the segment.
    const Vec3 ab = b.position - a.position;
    if (ab.norm() > 1e-9) CHECK((f.position - a.position).cross(ab).norm() <= 1e-9 * (1 + ab.squaredNorm()));
    const std::vector<Landmark> self{b};
    const auto s = fuse(b, self);
    CHECK(s.position == b.position);
    CHECK(s.confidence == b.confidence);
  }
}

TEST_CASE("insert is order-insensitive for separated inputs") {
  std::vector<Landmark> items;
  for (int i = 0; i < 12; ++i) items.push_back(lm(i % 2 ? "bed" : "lamp", {i * 1.5, 0, 0}, 0.6 + i * 0.02));
  std::mt19937_64 rng(2);
  LandmarkStore a;
  for (const auto& l : items) a.insert(l);
  auto sorted_a = a.landmarks();
  auto key = [](const Landmark& l) { return std::make_tuple(l.category, l.position.x(), l.confidence); };
  std::sort(sorted_a.begin(), sorted_a.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(items.begin(), items.end(), rng);
    LandmarkStore b;
    for (const auto& l : items) b.insert(l);
    auto sorted_b = b.landmarks();
    std::sort(sorted_b.begin(), sorted_b.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
    CHECK(sorted_a == sorted_b);
  }
}

TEST_CASE("json round trip is exact") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(-20, 20), conf(0.55, 1.0);
  for (int t = 0; t < 50; ++t) {
    LandmarkStore s(0.5 + t * 0.01, 0.55);
    for (int i = 0; i < 30; ++i)
      s.insert(lm("cat" + std::to_string(rng() % 4), {pos(rng), pos(rng), pos(rng)}, conf(rng), "desc \"q\" " + std::to_string(i)));
    const auto back = LandmarkStore::from_json(nlohmann::json::parse(s.to_json().dump()));
    CHECK(back.landmarks() == s.landmarks());
    CHECK(back.overlap_distance() == s.overlap_distance());
  }
  const auto path = std::filesystem::temp_directory_path() / "wf_landmarks_test.json";
  LandmarkStore s;
  s.insert(lm("sofa", {1.0 / 3.0, 2, 0.1}, 0.8, "blue"));
  s.save(path);
  CHECK(LandmarkStore::load(path).landmarks() == s.landmarks());
  std::filesystem::remove(path);
}

TEST_CASE("json errors") {
  CHECK_THROWS_AS(LandmarkStore::from_json(nlohmann::json{{"version", 2}, {"landmarks", nlohmann::json::array()}}),
                  ParseError);
  CHECK_THROWS_AS(LandmarkStore::from_json(nlohmann::json::array()), ParseError);
  CHECK_THROWS(LandmarkStore::load("/nonexistent/wf.json"));
}
