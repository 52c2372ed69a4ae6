#include "trajrepair/timing.hpp"

#include "trajrepair/errors.hpp"

#include <cmath>
#include <numeric>

namespace trajrepair {

TimingStats summarize(const std::vector<double>& values) {
  TimingStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

TimingReport timing_harness(const Scenario& scenario, int runs) {
  if (runs < 2) throw ContractViolation("timing harness needs at least 2 runs");
  TimingReport report;
  report.runs = runs;
  std::vector<double> totals;
  std::vector<double> calls;
  for (int r = 0; r < runs; ++r) {
    const FttrResult res = run_pipeline(scenario);
    totals.push_back(res.total_time_s);
    for (const ProbeRecord& p : res.iterations) calls.push_back(p.elapsed_s);
    report.f_ttr.push_back(res.f_ttr);
  }
  report.total = summarize(totals);
  report.per_iteration = summarize(calls);
  report.planner_calls = calls.size();
  return report;
}

}  // namespace trajrepair
