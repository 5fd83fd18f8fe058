#pragma once

#include "wayfinder/gridworld.hpp"

#include <span>
#include <vector>

namespace wf::eval {

/// Successes over episodes.
double success_rate(std::span<const sim::EpisodeResult> results);

/// Success weighted by path length. Unsolvable episodes and failures add 0.
double spl(std::span<const sim::EpisodeResult> results);

/// Per-episode SPL term.
double spl_term(const sim::EpisodeResult& r);

/// Judge scores in 1..5 mapped linearly to a percentage.
double llm_match(std::span<const int> scores);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean and sample standard deviation (0 for fewer than two values).
MeanStd mean_std(std::span<const double> values);

}  // namespace wf::eval
