#include "cli.hpp"

#include "trajrepair/errors.hpp"
#include "trajrepair/repair.hpp"
#include "trajrepair/scenario_io.hpp"
#include "trajrepair/search.hpp"
#include "trajrepair/timing.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <vector>

#include "CLI11.hpp"

namespace trajrepair::cli {

namespace {

struct Options {
  std::string scenario;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::optional<double> budget_s;
  double t_rep = 0.0;
  int runs = 100;
  bool verbose = false;
};

Scenario load(const Options& opt) {
  nlohmann::json doc = load_scenario_json(opt.scenario);
  for (const std::string& kv : opt.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ScenarioError("--set", "expected key=value, got " + kv);
    apply_override(doc, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opt.budget_s) apply_override(doc, "search.time_budget_s", format_number(*opt.budget_s));
  return parse_scenario(doc);
}

void print_warnings(const Scenario& sc, std::ostream& err) {
  for (const std::string& w : sc.warnings) err << "warning: " << w << "\n";
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

void print_iterations(const FttrResult& res, std::ostream& err) {
  err << "iter  t_rep  feasible  status  min_speed  max|a_s|  max|a_l|  elapsed_s\n";
  for (std::size_t i = 0; i < res.iterations.size(); ++i) {
    const ProbeRecord& r = res.iterations[i];
    const auto& rep = r.outcome.report;
    err << i << "  " << format_number(r.t_rep) << "  " << yes_no(r.feasible) << "  "
        << (r.outcome.candidate ? to_string(r.outcome.candidate->status) : "n/a") << "  "
        << (rep ? format_number(rep->min_speed) : "-") << "  "
        << (rep ? format_number(rep->max_longitudinal_acceleration) : "-") << "  "
        << (rep ? format_number(rep->max_lateral_acceleration) : "-") << "  "
        << format_number(r.elapsed_s) << "\n";
  }
}

int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(opt);
  print_warnings(sc, err);
  out << "valid: " << (sc.name.empty() ? opt.scenario : sc.name) << "\n";
  return kExitOk;
}

int cmd_check(const Options& opt, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(opt);
  print_warnings(sc, err);
  const CollisionResult hit = detect_collision(sc.problem.reference, sc.problem.obstacles,
                                               sc.search.collision_check_dt,
                                               sc.problem.config.horizon);
  out << "ttc: " << format_number(hit.ttc);
  if (hit.collides()) out << " obstacle: " << hit.obstacle_id;
  out << "\n";
  return kExitOk;
}

int cmd_repair(const Options& opt, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(opt);
  print_warnings(sc, err);
  const RepairCandidate cand = plan(sc.problem, sc.problem.reference.t_start() + opt.t_rep);
  const FeasibilityReport rep =
      is_feasible(cand.trajectory, sc.problem.obstacles, sc.problem.limits,
                  sc.search.collision_check_dt, sc.problem.config.horizon, sc.search.speed_floor);
  if (!opt.out_dir.empty()) export_repair(sc, cand, rep, opt.out_dir);
  if (opt.verbose && !cand.message.empty()) err << "repair: " << cand.message << "\n";
  out << "t_rep: " << format_number(opt.t_rep) << " status: " << to_string(cand.status)
      << " feasible: " << yes_no(rep.overall) << " min_speed: " << format_number(rep.min_speed)
      << " max_abs_a_s: " << format_number(rep.max_longitudinal_acceleration)
      << " max_abs_a_l: " << format_number(rep.max_lateral_acceleration) << "\n";
  return cand.status == RepairStatus::kOk ? kExitOk : kExitDomain;
}

int cmd_search(const Options& opt, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(opt);
  print_warnings(sc, err);
  const FttrResult res = run_pipeline(sc);
  if (!opt.out_dir.empty()) export_results(ResultBundle{&sc, &res, 0.05}, opt.out_dir);
  print_iterations(res, err);
  out << "f_ttr: " << format_number(res.f_ttr) << " ttc: " << format_number(res.ttc)
      << " iterations: " << res.iterations.size() << " terminated_by: " << to_string(res.termination)
      << " unresolved: " << yes_no(res.unresolved) << "\n";
  return res.unresolved ? kExitDomain : kExitOk;
}

int cmd_bench(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.runs < 2) throw ContractViolation("--runs must be >= 2");
  const Scenario sc = load(opt);
  print_warnings(sc, err);
  const TimingReport t = timing_harness(sc, opt.runs);
  if (opt.verbose) {
    err << "runs: " << t.runs << " planner_calls: " << t.planner_calls
        << " cv_total: " << format_number(t.total.coefficient_of_variation()) << "\n";
  }
  out << "scenario  total_search_time_s  per_iteration_time_s\n";
  out << (sc.name.empty() ? opt.scenario : sc.name) << "  " << format_number(t.total.mean)
      << " +- " << format_number(t.total.stddev) << "  " << format_number(t.per_iteration.mean)
      << " +- " << format_number(t.per_iteration.stddev) << "\n";
  return kExitOk;
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x == 0.0 ? 0.0 : x);
  std::string s = buf;
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trajectory repair and time-to-react search"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
    sub->add_option("--set", opt.overrides, "Override a scenario field, key=value (repeatable)");
    sub->add_flag("--verbose", opt.verbose, "Extra diagnostics on stderr");
  };
  CLI::App* validate = app.add_subcommand("validate", "Load and validate a scenario");
  CLI::App* check = app.add_subcommand("check", "Time-to-collision of the reference");
  CLI::App* repair = app.add_subcommand("repair", "Repair at a fixed t_rep");
  CLI::App* search = app.add_subcommand("search", "Full time-to-react search");
  CLI::App* bench = app.add_subcommand("bench", "Timing statistics over repeated searches");
  for (CLI::App* sub : {validate, check, repair, search, bench}) common(sub);
  repair->add_option("--t-rep", opt.t_rep, "Repair start, s after the reference start")->required();
  repair->add_option("--out", opt.out_dir, "Export directory");
  search->add_option("--out", opt.out_dir, "Export directory");
  for (CLI::App* sub : {repair, search, bench})
    sub->add_option("--budget-s", opt.budget_s, "Search time budget, s");
  bench->add_option("--runs", opt.runs, "Number of searches")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*validate) return cmd_validate(opt, out, err);
    if (*check) return cmd_check(opt, out, err);
    if (*repair) return cmd_repair(opt, out, err);
    if (*search) return cmd_search(opt, out, err);
    return cmd_bench(opt, out, err);
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace trajrepair::cli
