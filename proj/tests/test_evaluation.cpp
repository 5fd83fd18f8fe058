#include "wayfinder/benchmark.hpp"
#include "wayfinder/mock_perception.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

using namespace wf;
using namespace wf::eval;

namespace {

sim::EpisodeResult result(bool success, double geodesic, double path, bool solvable = true) {
  sim::EpisodeResult r;
  r.success = success;
  r.geodesic = geodesic;
  r.path_length = path;
  r.solvable = solvable;
  return r;
}

SuiteConfig small_suite() {
  SuiteConfig s;
  s.scene_seeds = {11, 12};
  s.category_goals = 2;
  s.text_goals = 0;
  s.image_goals = 0;
  s.baseline = false;
  return s;
}

class ThrowingVerifier : public perception::GoalVerifier {
 public:
  perception::Verification verify(const perception::Observation&, const GoalSpec&) override {
    throw std::runtime_error("verifier crashed");
  }
};

}  // namespace

TEST_CASE("success rate examples") {
  std::vector<sim::EpisodeResult> all(10, result(true, 1, 1)), none(10, result(false, 1, 1));
  CHECK(success_rate(all) == 1.0);
  CHECK(success_rate(none) == 0.0);
  std::vector<sim::EpisodeResult> mixed{result(true, 1, 1), result(true, 1, 1), result(true, 1, 1), result(false, 1, 1)};
  CHECK(success_rate(mixed) == 0.75);
  CHECK_THROWS_AS(success_rate(std::vector<sim::EpisodeResult>{}), ContractViolation);
}

TEST_CASE("spl examples") {
  std::vector<sim::EpisodeResult> optimal{result(true, 3, 3), result(true, 7.5, 7.5)};
  CHECK(spl(optimal) == 1.0);
  std::vector<sim::EpisodeResult> half{result(true, 5, 10)};
  CHECK(spl(half) == 0.5);
  CHECK(spl_term(result(false, 5, 1)) == 0.0);
  CHECK(spl_term(result(false, 5, 1000)) == 0.0);
  CHECK(spl_term(result(true, 5, 4)) == 1.0);
  CHECK(spl_term(result(true, sim::kUnreachable, 4, false)) == 0.0);
  CHECK_THROWS_AS(spl_term(result(true, 0.0, 3)), ContractViolation);
  CHECK_THROWS_AS(spl(std::vector<sim::EpisodeResult>{}), ContractViolation);
}

TEST_CASE("llm match examples") {
  CHECK(llm_match(std::vector<int>{5, 5, 5}) == 100.0);
  CHECK(llm_match(std::vector<int>{1, 1}) == 0.0);
  CHECK(llm_match(std::vector<int>{1, 3, 5}) == 50.0);
  CHECK_THROWS_AS(llm_match(std::vector<int>{0}), ContractViolation);
  CHECK_THROWS_AS(llm_match(std::vector<int>{6}), ContractViolation);
  CHECK_THROWS_AS(llm_match(std::vector<int>{}), ContractViolation);
}

TEST_CASE("mean and sample deviation") {
  CHECK(mean_std(std::vector<double>{4.0}).stddev == 0.0);
  const auto m = mean_std(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(m.mean == 5.0);
  CHECK(m.stddev == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));
}

TEST_CASE("spl never exceeds success rate") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> len(0.01, 30.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<sim::EpisodeResult> rs(1 + rng() % 40);
    for (auto& r : rs) r = result(rng() % 3 != 0, len(rng), len(rng), rng() % 10 != 0);
    const double s = spl(rs), sr = success_rate(rs);
    CHECK(s >= 0.0);
    CHECK(s <= sr);
    CHECK(sr <= 1.0);
  }
}

TEST_CASE("episode rows survive the csv format") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::vector<EpisodeRow> rows;
  for (int i = 0; i < 200; ++i) {
    EpisodeRow r;
    r.scene_seed = rng();
    r.episode = i;
    r.task = i % 2 ? "category" : "text_instance";
    r.method = i % 3 ? "memory" : "baseline";
    r.goal = i % 5 ? "category:sofa" : "text:the chair, \"tall\" one";
    r.success = rng() % 2;
    r.solvable = rng() % 7 != 0;
    r.path_length = u(rng);
    r.geodesic = i % 11 ? u(rng) : sim::kUnreachable;
    r.steps = static_cast<int>(rng() % 500);
    r.stop_distance = u(rng) / 3.0;
    r.candidates_visited = static_cast<int>(rng() % 6);
    r.verifications = static_cast<int>(rng() % 20);
    r.reason = i % 4 ? "" : "error: bad, worse\nline";
    rows.push_back(r);
  }
  std::stringstream ss;
  write_csv(rows, ss);
  CHECK(read_csv(ss) == rows);
}

TEST_CASE("unsolvable rows count as failures") {
  std::vector<EpisodeRow> rows(2);
  rows[0].task = rows[1].task = "category";
  rows[0].method = rows[1].method = "memory";
  rows[0].success = true;
  rows[0].geodesic = 4.0;
  rows[0].path_length = 5.0;
  rows[1].solvable = false;
  rows[1].geodesic = sim::kUnreachable;
  rows[1].path_length = 12.0;
  const auto sums = summarize(rows);
  const auto it = std::find_if(sums.begin(), sums.end(), [](const TaskSummary& s) { return s.task == "category"; });
  REQUIRE(it != sums.end());
  CHECK(it->episodes == 2);
  CHECK(it->sr == 0.5);
  CHECK(it->spl == 0.4);
}

TEST_CASE("a small suite yields one row per episode and reruns identically") {
  const auto suite = small_suite();
  const auto a = run_benchmark(suite);
  REQUIRE(a.rows.size() == 4);
  for (const auto& r : a.rows) {
    CHECK(r.method == "memory");
    CHECK(r.solvable);
    CHECK(r.geodesic >= suite.min_start_geodesic);
  }
  const auto* s = a.summary("all", "memory");
  REQUIRE(s != nullptr);
  CHECK(s->episodes == 4);
  CHECK(s->sr >= 0.0);
  CHECK(s->sr <= 1.0);
  CHECK(s->spl <= s->sr);
  CHECK(a.rows_for("baseline").empty());
  CHECK(a.config_hash != 0);
  CHECK(a.to_json().at("episodes").size() == 4);

  const auto b = run_benchmark(suite);
  CHECK(b.rows == a.rows);
  CHECK(b.config_hash == a.config_hash);
  CHECK(b.summary("all", "memory")->spl == s->spl);
}

TEST_CASE("parallel workers give the same report") {
  auto suite = small_suite();
  const auto serial = run_benchmark(suite);
  suite.workers = 2;
  CHECK(run_benchmark(suite).rows == serial.rows);
}

TEST_CASE("episode crashes are captured as failures") {
  const auto factory = [](std::shared_ptr<const sim::Scene> scene, std::uint64_t seed) {
    auto io = perception::make_mock_interfaces(std::move(scene), seed);
    io.verifier = std::make_shared<ThrowingVerifier>();
    return io;
  };
  auto suite = small_suite();
  suite.baseline = true;
  const auto rep = run_benchmark(suite, factory);
  CHECK(rep.rows.size() == 8);
  int crashed = 0;
  for (const auto& r : rep.rows) {
    CHECK_FALSE(r.success);
    if (r.reason.rfind("error: ", 0) == 0) ++crashed;
  }
  CHECK(crashed > 0);
  for (const auto& sc : rep.scenes) CHECK(sc.error.empty());
}

TEST_CASE("suite configuration errors") {
  SuiteConfig s;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.scene_seeds = {1};
  s.workers = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.workers = 1;
  s.reuse_memories = true;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(SuiteConfig::from_json(nlohmann::json::array()), ConfigError);
  const auto parsed = SuiteConfig::from_json({{"scenes", {{"first", 3}, {"count", 4}}}});
  CHECK(parsed.scene_seeds == std::vector<std::uint64_t>{3, 4, 5, 6});
}
