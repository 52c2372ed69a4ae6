#pragma once

#include "trajrepair/scenario_io.hpp"

#include <vector>

namespace trajrepair {

struct TimingStats {
  double mean = 0.0;
  double stddev = 0.0;  // unbiased, n - 1 denominator
  std::size_t count = 0;

  double coefficient_of_variation() const { return mean > 0.0 ? stddev / mean : 0.0; }
};

TimingStats summarize(const std::vector<double>& values);

struct TimingReport {
  int runs = 0;
  TimingStats total;          // whole search per run, s
  TimingStats per_iteration;  // one planner call, s; zero when nothing was planned
  std::size_t planner_calls = 0;  // over all runs
  std::vector<double> f_ttr;      // per run
};

// Runs the full pipeline `runs` times sequentially. Requires runs >= 2.
TimingReport timing_harness(const Scenario& scenario, int runs);

}  // namespace trajrepair
