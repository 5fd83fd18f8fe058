#include "wayfinder/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wf::eval {

double success_rate(std::span<const sim::EpisodeResult> results) {
  require(!results.empty(), "success rate needs at least one episode");
  const auto n = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.success; });
  return static_cast<double>(n) / static_cast<double>(results.size());
}

double spl_term(const sim::EpisodeResult& r) {
  if (!r.success || !r.solvable) return 0.0;
  require(r.geodesic > 0.0 && std::isfinite(r.geodesic), "successful episode needs a positive shortest path");
  require(r.path_length >= 0.0, "path length must be non-negative");
  return r.geodesic / std::max(r.path_length, r.geodesic);
}

double spl(std::span<const sim::EpisodeResult> results) {
  require(!results.empty(), "SPL needs at least one episode");
  double sum = 0.0;
  for (const auto& r : results) sum += spl_term(r);
  return sum / static_cast<double>(results.size());
}

double llm_match(std::span<const int> scores) {
  require(!scores.empty(), "LLM-Match needs at least one score");
  long total = 0;
  for (int s : scores) {
    require(s >= 1 && s <= 5, "judge scores must lie in 1..5");
    total += s - 1;
  }
  return 100.0 * static_cast<double>(total) / (4.0 * static_cast<double>(scores.size()));
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return out;
}

}  // namespace wf::eval
