// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "trajrepair/costs.hpp"
#include "trajrepair/scenario_io.hpp"
#include "trajrepair/search.hpp"
#include "trajrepair/timing.hpp"

#include "cli.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace trajrepair::acceptance {
namespace {

using nlohmann::json;
using testing::scenario_path;
using testing::uniform_in;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FeasibilityReport check(const Scenario& sc, const UniformBSpline& traj) {
  return is_feasible(traj, sc.problem.obstacles, sc.problem.limits, sc.search.collision_check_dt,
                     sc.problem.config.horizon, sc.search.speed_floor);
}

bool same_curve(const UniformBSpline& a, const UniformBSpline& b) {
  if (a.num_controls() != b.num_controls() || a.knot_interval() != b.knot_interval() ||
      a.t_start() != b.t_start())
    return false;
  for (int i = 0; i < a.num_controls(); ++i)
    if (a.control_point(i) != b.control_point(i)) return false;
  return true;
}

int call_bound(double ttc, double delta_t) {
  return std::max(0, static_cast<int>(std::ceil(std::log2(ttc / delta_t))) + 1);
}

// 1. Spline invariants on random cubic splines.
Outcome spline_invariants() {
  Outcome o;
  std::mt19937 rng(2024);
  const auto t0 = std::chrono::steady_clock::now();
  double worst_unity = 0, worst_hull = 0, worst_fd = 0;
  for (int n = 0; n < 1000; ++n) {
    const UniformBSpline sp = testing::random_spline(rng, 3);
    const UniformBSpline d1 = sp.derivative(1);
    for (int k = 0; k < 5; ++k) {
      const double t = uniform_in(rng, sp.t_start(), sp.t_end());
      const ActiveBasis b = sp.active_basis(t);
      double sum = 0;
      for (double w : b.weights) sum += w;
      worst_unity = std::max(worst_unity, std::abs(sum - 1.0));

      std::vector<Vec2> active;
      for (int r = 0; r <= 3; ++r) active.push_back(sp.control_point(b.first_control + r));
      worst_hull = std::max(worst_hull, testing::hull_excess(active, sp.evaluate(t)));

      const double h = 1e-5;
      const double tc = std::clamp(t, sp.t_start() + h, sp.t_end() - h);
      const Vec2 fd = (sp.evaluate(tc + h) - sp.evaluate(tc - h)) / (2 * h);
      worst_fd = std::max(worst_fd, (d1.evaluate(tc) - fd).norm() / std::max(1.0, fd.norm()));
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(worst_unity < 1e-9, fmt("partition of unity error %.3g", worst_unity));
  o.require(worst_hull < 1e-9, fmt("convex hull excess %.3g m", worst_hull));
  o.require(worst_fd < 1e-4, fmt("derivative rel. error %.3g", worst_fd));
  o.require(elapsed < 5.0, fmt("runtime %.2f s", elapsed));
  if (o.pass)
    o.detail = fmt("unity %.1e, hull %.1e", worst_unity, worst_hull) +
               fmt(", derivative %.1e, %.2f s", worst_fd, elapsed);
  return o;
}

std::vector<FrenetPoint> random_controls(std::mt19937& rng, int n, double spread) {
  std::vector<FrenetPoint> q(n);
  double s = 0.0;
  for (auto& p : q) {
    s += uniform_in(rng, 0.0, spread);
    p = FrenetPoint(s, uniform_in(rng, -spread, spread));
  }
  return q;
}

// 2. Analytic vs finite-difference gradients.
Outcome cost_gradients() {
  Outcome o;
  std::mt19937 rng(77);
  const auto t0 = std::chrono::steady_clock::now();
  using Controls = std::vector<FrenetPoint>;
  double worst[4] = {0, 0, 0, 0};
  for (int n = 0; n < 50; ++n) {
    const double dt = uniform_in(rng, 0.3, 1.0);
    const Controls q = random_controls(rng, 10, 3.0);
    const FreeRange all = FreeRange::all(10);
    auto sp = [&](const Controls& x) { return UniformBSpline(3, x, dt); };

    // Smoothness.
    {
      auto f = [&](const Controls& x) { return smoothness_cost(sp(x), all).value; };
      worst[0] = std::max(worst[0], testing::gradient_rel_error(smoothness_cost(sp(q), all).gradient,
                                                                testing::fd_gradient(q, f)));
    }
    // Collision with anchors on both sides of the clearance band.
    {
      std::vector<AnchorPair> anchors;
      for (int k = 0; k < 6; ++k) {
        AnchorPair a;
        a.control_index = std::uniform_int_distribution<int>(0, 9)(rng);
        const double ang = uniform_in(rng, 0, 6.283);
        a.v = {std::cos(ang), std::sin(ang)};
        a.p = q[a.control_index] - uniform_in(rng, -2.0, 2.0) * a.v;
        anchors.push_back(a);
      }
      const double s_f = uniform_in(rng, 0.5, 1.5);
      auto f = [&](const Controls& x) { return collision_cost(x, anchors, s_f, all).value; };
      worst[1] = std::max(worst[1],
                          testing::gradient_rel_error(collision_cost(q, anchors, s_f, all).gradient,
                                                      testing::fd_gradient(q, f)));
    }
    // Feasibility with limits low enough to hit every branch.
    {
      const auto shape = FeasibilityShape::from_limits(uniform_in(rng, 1, 5), uniform_in(rng, 1, 6),
                                                       uniform_in(rng, 2, 10));
      const CostWeights w{1, 1, 1, 0, 1.0, 0.5, 0.2, 1.0};
      auto f = [&](const Controls& x) { return feasibility_cost(sp(x), shape, w, all).value; };
      worst[2] = std::max(worst[2], testing::gradient_rel_error(
                                        feasibility_cost(sp(q), shape, w, all).gradient,
                                        testing::fd_gradient(q, f)));
    }
    // Fitting against an independent curve.
    {
      const UniformBSpline target(3, random_controls(rng, 9, 3.0), 0.4);
      FittingOptions fo;
      fo.axial_weight = uniform_in(rng, 0.5, 5);
      fo.radial_weight = uniform_in(rng, 0.5, 20);
      auto fsp = [&](const Controls& x) { return UniformBSpline(3, x, 0.4); };
      auto f = [&](const Controls& x) { return fitting_cost(fsp(x), target, fo, all).value; };
      worst[3] = std::max(worst[3], testing::gradient_rel_error(
                                        fitting_cost(fsp(q), target, fo, all).gradient,
                                        testing::fd_gradient(q, f)));
    }
  }
  const double elapsed = seconds_since(t0);
  const char* names[4] = {"J_s", "J_c", "J_d", "J_f"};
  for (int k = 0; k < 4; ++k)
    o.require(worst[k] < 1e-4, std::string(names[k]) + fmt(" rel. error %.3g", worst[k]));
  o.require(elapsed < 30.0, fmt("runtime %.2f s", elapsed));
  if (o.pass)
    o.detail = fmt("worst rel. errors J_s %.1e, J_c %.1e", worst[0], worst[1]) +
               fmt(", J_d %.1e, J_f %.1e", worst[2], worst[3]);
  return o;
}

// 3. Collision penalty continuity at both breakpoints.
Outcome collision_smoothness() {
  Outcome o;
  double worst = 0;
  for (double s_f : {0.5, 1.0, 1.3}) {
    const auto pairs = {
        std::pair{collision_penalty_branch(CollisionBranch::kClear, 0.0, s_f),
                  collision_penalty_branch(CollisionBranch::kCubic, 0.0, s_f)},
        std::pair{collision_penalty_branch(CollisionBranch::kCubic, s_f, s_f),
                  collision_penalty_branch(CollisionBranch::kQuadratic, s_f, s_f)}};
    for (const auto& [l, r] : pairs) {
      worst = std::max({worst, std::abs(l.value - r.value), std::abs(l.d1 - r.d1), std::abs(l.d2 - r.d2)});
    }
    const auto q = collision_penalty_branch(CollisionBranch::kQuadratic, s_f, s_f);
    worst = std::max({worst, std::abs(q.d1 - 3 * s_f * s_f), std::abs(q.d2 - 6 * s_f)});
  }
  o.require(worst < 1e-9, fmt("max one-sided mismatch %.3g", worst));
  if (o.pass) o.detail = fmt("max one-sided mismatch %.1e for s_f in {0.5, 1.0, 1.3}", worst);
  return o;
}

// 4. Branch coverage of the search and the bracket trace.
Outcome search_branches() {
  Outcome o;
  const Scenario start = load_scenario(scenario_path("start_in_collision.json"));
  const FttrResult r0 = run_pipeline(start);
  o.require(r0.ttc == 0.0 && r0.f_ttr == 0.0, "TTC = 0 branch did not return 0");
  o.require(r0.gamma_is_reference && same_curve(r0.gamma, start.problem.reference),
            "TTC = 0 branch changed gamma");
  o.require(r0.iterations.empty(), "TTC = 0 branch called the planner");

  const Scenario clear = load_scenario(scenario_path("straight_clear.json"));
  const FttrResult ri = run_pipeline(clear);
  o.require(std::isinf(ri.ttc) && std::isinf(ri.f_ttr), "TTC = inf branch did not return inf");
  o.require(ri.gamma_is_reference && same_curve(ri.gamma, clear.problem.reference),
            "TTC = inf branch changed gamma");
  o.require(ri.iterations.empty(), "TTC = inf branch called the planner");

  const Scenario s1 = load_scenario(scenario_path("scenario1_crossing.json"));
  const FttrResult r = run_pipeline(s1);
  const int bound = call_bound(r.ttc, s1.search.delta_t);
  o.require(static_cast<int>(r.iterations.size()) <= bound,
            fmt("%g planner calls exceed bound %g", static_cast<double>(r.iterations.size()), bound));
  double lo = 0.0, hi = r.ttc;
  for (const auto& it : r.iterations) {
    if (it.feasible) {
      o.require(it.bracket_start == it.t_rep && it.bracket_end == hi, "feasible step moved the wrong edge");
    } else {
      o.require(it.bracket_end == it.t_rep && it.bracket_start == lo, "infeasible step moved the wrong edge");
    }
    lo = it.bracket_start;
    hi = it.bracket_end;
    o.require(lo < hi, fmt("bracket collapsed to [%g, %g]", lo, hi));
  }
  o.require(r.termination == SearchTermination::kResolution, "non-degenerate search did not reach resolution");
  o.require(hi - lo <= s1.search.delta_t, "final bracket wider than delta_t");
  if (o.pass)
    o.detail = fmt("TTC %g s: %g planner calls", r.ttc, static_cast<double>(r.iterations.size())) +
               fmt(" (bound %g), F-TTR %g s", bound, r.f_ttr);
  return o;
}

// 5. Bisection against a step-function planner.
Outcome step_oracle() {
  Outcome o;
  std::mt19937 rng(5150);
  double worst = 0;
  for (int n = 0; n < 20; ++n) {
    const double ttc = uniform_in(rng, 1.0, 10.0);
    const double dt = uniform_in(rng, 0.05, 0.8);
    const double tau = uniform_in(rng, 0.0, ttc);
    int calls = 0;
    const Probe probe = [&](double t_rep) {
      ++calls;
      ProbeOutcome p;
      p.feasible = t_rep <= tau;
      return p;
    };
    const auto b = bisect_repair_time(ttc, dt, probe, [] { return true; });
    worst = std::max(worst, std::abs(b.f_ttr - tau) / dt);
    o.require(std::abs(b.f_ttr - tau) <= dt, fmt("F-TTR %g vs threshold %g", b.f_ttr, tau));
    o.require(calls <= call_bound(ttc, dt), "call bound exceeded");
  }
  if (o.pass) o.detail = fmt("worst |F-TTR - tau| = %.2f * delta_t over 20 triples", worst);
  return o;
}

struct ScenarioRun {
  Scenario sc;
  FttrResult res;
  double elapsed;
};

ScenarioRun run_scenario(const std::string& file) {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario sc = load_scenario(scenario_path(file));
  FttrResult res = run_pipeline(sc);
  return {std::move(sc), std::move(res), seconds_since(t0)};
}

// 6. Crossing-traffic archetype.
Outcome scenario_one() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioRun run = run_scenario("scenario1_crossing.json");
  const Scenario& sc = run.sc;
  o.require(std::abs(run.res.ttc - 2.9) <= sc.search.collision_check_dt + 1e-9,
            fmt("TTC %g s, constructed 2.9 s", run.res.ttc));
  o.require(!run.res.gamma_is_reference, "no feasible repair found");
  const FeasibilityReport g = check(sc, run.res.gamma);
  o.require(g.overall, "gamma fails the feasibility check");
  o.require(g.max_lateral_acceleration < 1e-6,
            fmt("gamma has lateral acceleration %g m/s^2", g.max_lateral_acceleration));
  o.require(g.max_longitudinal_acceleration <= sc.problem.limits.a_max,
            fmt("|a_s| %g exceeds a_max", g.max_longitudinal_acceleration));

  std::vector<double> min_speed;
  std::string speeds;
  for (double t_rep : {0.0, 0.8, 1.2, 1.6}) {
    const RepairCandidate c = plan(sc.problem, sc.problem.reference.t_start() + t_rep);
    const FeasibilityReport r = check(sc, c.trajectory);
    o.require(r.collision_free, fmt("t_rep %g s repair collides", t_rep));
    min_speed.push_back(r.min_speed);
    speeds += (speeds.empty() ? "" : ", ") + cli::format_number(r.min_speed);
  }
  for (std::size_t k = 1; k < min_speed.size(); ++k)
    o.require(min_speed[k] < min_speed[k - 1], "min speed not decreasing: " + speeds);
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 60.0, fmt("runtime %.1f s", elapsed));
  if (o.pass)
    o.detail = fmt("F-TTR %g s, max |a_s| %.2f m/s^2", run.res.f_ttr, g.max_longitudinal_acceleration) +
               ", min speed over t_rep {0, 0.8, 1.2, 1.6}: " + speeds + fmt(" m/s, %.1f s", elapsed);
  return o;
}

// 7. Road damage with neighbours.
Outcome scenario_two() {
  Outcome o;
  const ScenarioRun run = run_scenario("scenario2_road_damage.json");
  const Scenario& sc = run.sc;
  o.require(std::abs(run.res.ttc - 1.6) <= sc.search.collision_check_dt + 1e-9,
            fmt("TTC %g s, constructed 1.6 s", run.res.ttc));
  o.require(!run.res.gamma_is_reference, "no feasible repair found");
  const FeasibilityReport g = check(sc, run.res.gamma);
  o.require(g.overall, "gamma fails the feasibility check");
  o.require(g.max_lateral_acceleration <= sc.problem.limits.a_max,
            fmt("max |a_l| %g exceeds a_max", g.max_lateral_acceleration));
  double max_shift = 0.0;
  for (double t : sample_times(sc.problem.reference.t_start(), sc.problem.reference.t_end(), 0.05))
    max_shift = std::max(max_shift, std::abs(run.res.gamma.evaluate(t).y() -
                                             sc.problem.reference.evaluate(t).y()));
  o.require(max_shift > 1.0, fmt("lateral deviation only %g m", max_shift));
  bool later_infeasible = false;
  for (const auto& it : run.res.iterations)
    if (it.t_rep > run.res.f_ttr && !it.feasible) later_infeasible = true;
  o.require(later_infeasible, "no infeasible probe beyond F-TTR");
  o.require(run.elapsed < 60.0, fmt("runtime %.1f s", run.elapsed));
  if (o.pass)
    o.detail = fmt("F-TTR %g s, max |a_l| %.2f m/s^2", run.res.f_ttr, g.max_lateral_acceleration) +
               fmt(", lateral shift %.2f m, %.1f s", max_shift, run.elapsed);
  return o;
}

// 8. Anytime property under truncated budgets.
Outcome anytime() {
  Outcome o;
  std::mt19937 rng(88);
  int truncated = 0, feasible = 0, reference = 0;
  for (const char* file : {"scenario1_crossing.json", "scenario2_road_damage.json"}) {
    Scenario sc = load_scenario(scenario_path(file));
    const double full = run_pipeline(sc).total_time_s;
    for (int n = 0; n < 25; ++n) {
      sc.search.time_budget = uniform_in(rng, 1e-4, full);
      const FttrResult r = run_pipeline(sc);
      if (r.termination == SearchTermination::kTimeBudget) ++truncated;
      if (r.gamma_is_reference) {
        ++reference;
        o.require(same_curve(r.gamma, sc.problem.reference), "gamma flagged reference but differs");
      } else {
        ++feasible;
        o.require(check(sc, r.gamma).overall, "truncated search returned an infeasible gamma");
      }
    }
  }
  o.require(truncated > 0, "no budget forced an early exit");
  if (o.pass)
    o.detail = fmt("50 budgets, %g early exits", truncated) +
               fmt(", gamma feasible %g, reference %g", feasible, reference);
  return o;
}

// 9. Timing harness stability.
Outcome timing() {
  Outcome o;
  std::string rows;
  for (const char* file : {"scenario1_crossing.json", "scenario2_road_damage.json"}) {
    const Scenario sc = load_scenario(scenario_path(file));
    const TimingReport t = timing_harness(sc, 100);
    const double cv = t.total.coefficient_of_variation();
    o.require(cv < 0.25, sc.name + fmt(" total time CV %.1f%%", 100 * cv));
    for (double f : t.f_ttr) o.require(f == t.f_ttr.front(), sc.name + " F-TTR varies across runs");
    rows += (rows.empty() ? "" : "; ") + sc.name + " " + cli::format_number(t.total.mean) + " +- " +
            cli::format_number(t.total.stddev) + " s (CV " + fmt("%.1f%%)", 100 * cv);
  }
  o.detail = rows;
  return o;
}

std::string capture(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return out;
  char buf[512];
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  pclose(p);
  return out;
}

bool csv_well_formed(const std::filesystem::path& p, const std::string& header, std::size_t* rows) {
  std::ifstream f(p);
  std::string line;
  if (!std::getline(f, line) || line != header) return false;
  const auto commas = std::count(header.begin(), header.end(), ',');
  *rows = 0;
  while (std::getline(f, line)) {
    if (std::count(line.begin(), line.end(), ',') != commas) return false;
    ++*rows;
  }
  return true;
}

// 10. CLI summaries are byte-stable and exports are well formed.
Outcome cli_golden() {
  Outcome o;
  const std::string cli = TRAJREPAIR_CLI_PATH;
  const auto base = testing::fresh_dir("acceptance_cli");
  int compared = 0;
  for (const char* file : {"scenario1_crossing.json", "scenario2_road_damage.json",
                           "straight_clear.json", "start_in_collision.json"}) {
    const std::string path = scenario_path(file);
    for (const char* sub : {"validate", "check", "search"}) {
      std::string runs[2];
      for (int k = 0; k < 2; ++k) {
        std::string cmd = cli + " " + sub + " --scenario " + path;
        if (std::string(sub) == "search")
          cmd += " --out " + (base / (std::string(file) + std::to_string(k))).string();
        runs[k] = capture(cmd + " 2>/dev/null");
      }
      o.require(!runs[0].empty(), std::string(sub) + " printed nothing for " + file);
      o.require(runs[0] == runs[1], std::string(sub) + " summary differs between runs for " + file);
      ++compared;
    }
    for (int k = 0; k < 2; ++k) {
      const auto dir = base / (std::string(file) + std::to_string(k));
      std::ifstream rf(dir / "result.json");
      json r;
      try {
        r = json::parse(rf);
      } catch (const std::exception&) {
        o.require(false, std::string("result.json unreadable for ") + file);
        continue;
      }
      for (const char* key : {"schema_version", "scenario", "f_ttr_s", "ttc_s", "terminated_by",
                              "unresolved", "gamma_feasibility", "timing", "iterations"})
        o.require(r.contains(key), std::string("result.json lacks ") + key);
      std::size_t iter_rows = 0, series_rows = 0;
      o.require(csv_well_formed(dir / "iterations.csv",
                                "index,t_rep,feasible,status,bracket_start,bracket_end,elapsed_s,"
                                "min_speed_mps,max_abs_a_s_mps2,max_abs_a_l_mps2,duration_scale,"
                                "anchor_count",
                                &iter_rows),
                std::string("iterations.csv malformed for ") + file);
      o.require(iter_rows == r["iterations"].size(), "iteration rows differ from planner calls");
      o.require(csv_well_formed(dir / "series.csv", "stage,iteration,t_rep,t,s,l,v_s,v_l,a_s,a_l",
                                &series_rows) && series_rows > 0,
                std::string("series.csv malformed for ") + file);
      try {
        load_scenario(dir / "gamma_scenario.json");
      } catch (const std::exception& e) {
        o.require(false, std::string("gamma_scenario.json invalid: ") + e.what());
      }
    }
  }
  if (o.pass) o.detail = fmt("%g summaries byte-identical across two runs, exports valid", compared);
  return o;
}

}  // namespace
}  // namespace trajrepair::acceptance

int main() {
  using namespace trajrepair::acceptance;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"spline invariants on 1000 random cubic splines", spline_invariants},
      {"cost gradients vs finite differences", cost_gradients},
      {"collision penalty is C2 at 0 and s_f", collision_smoothness},
      {"search branches and bracket trace", search_branches},
      {"bisection vs step-function planner", step_oracle},
      {"crossing-traffic scenario", scenario_one},
      {"road-damage scenario", scenario_two},
      {"anytime property under truncated budgets", anytime},
      {"timing harness, 100 runs per scenario", timing},
      {"CLI golden summaries and exports", cli_golden},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << (i + 1) << ": " << criteria[i].first << " ("
              << o.detail << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
