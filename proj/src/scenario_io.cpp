#include "trajrepair/scenario_io.hpp"

#include "trajrepair/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace trajrepair {

using nlohmann::json;

namespace {

constexpr double kFitWarnRms = 0.1;  // m
constexpr double kTimeTolerance = 1e-9;

// Typed access to one object of the scenario document. Every error names the
// dotted path of the offending field.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ScenarioError(path_.empty() ? "document" : path_, "must be an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const {
    if (!has(key)) throw ScenarioError(field(key), "required field is missing");
    return j_.at(key);
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [k, _] : j_.items())
      if (!known.count(k)) throw ScenarioError(field(k), "unknown field");
  }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ScenarioError(field(key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ScenarioError(field(key), "must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  double positive(const std::string& key) const { return check_positive(key, number(key)); }
  double positive(const std::string& key, double fallback) const {
    return has(key) ? positive(key) : fallback;
  }
  double nonnegative(const std::string& key, double fallback) const {
    const double x = number(key, fallback);
    if (x < 0.0) throw ScenarioError(field(key), "must be >= 0");
    return x;
  }

  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ScenarioError(field(key), "must be an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ScenarioError(field(key), "must be true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ScenarioError(field(key), "must be a string");
    return v.get<std::string>();
  }

  Section child(const std::string& key) const { return Section(raw(key), field(key)); }

  const json& array(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw ScenarioError(field(key), "must be an array");
    return v;
  }

 private:
  double check_positive(const std::string& key, double x) const {
    if (!(x > 0.0)) throw ScenarioError(field(key), "must be > 0");
    return x;
  }

  const json& j_;
  std::string path_;
};

// Runs a domain validator and reports its message under `field`.
template <class F>
void validated(const std::string& field, F&& check) {
  try {
    check();
  } catch (const ContractViolation& e) {
    throw ScenarioError(field, e.what());
  }
}

double element(const json& arr, std::size_t i, const std::string& field) {
  if (!arr.at(i).is_number()) throw ScenarioError(field, "entries must be numbers");
  const double x = arr.at(i).get<double>();
  if (!std::isfinite(x)) throw ScenarioError(field, "entries must be finite");
  return x;
}

std::string indexed(const std::string& field, std::size_t i) {
  return field + "[" + std::to_string(i) + "]";
}

UniformBSpline parse_reference(const Section& sec, Scenario& out) {
  sec.allow({"degree", "knot_interval_s", "t_start_s", "control_points_m", "samples"});
  const int degree = sec.integer("degree", 3);
  if (degree < 3) throw ScenarioError(sec.field("degree"), "must be >= 3");
  const double dt = sec.positive("knot_interval_s");
  const bool has_cp = sec.has("control_points_m");
  const bool has_samples = sec.has("samples");
  if (has_cp == has_samples)
    throw ScenarioError(sec.field("control_points_m"),
                        "exactly one of control_points_m and samples is required");

  if (has_cp) {
    const std::string f = sec.field("control_points_m");
    const json& arr = sec.array("control_points_m");
    std::vector<FrenetPoint> cps;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& p = arr[i];
      if (!p.is_array() || p.size() != 2) throw ScenarioError(indexed(f, i), "must be [s, l]");
      cps.emplace_back(element(p, 0, indexed(f, i)), element(p, 1, indexed(f, i)));
    }
    if (static_cast<int>(cps.size()) < degree + 1)
      throw ScenarioError(f, "needs at least degree + 1 points");
    return UniformBSpline(degree, std::move(cps), dt, sec.number("t_start_s", 0.0));
  }

  if (sec.has("t_start_s"))
    throw ScenarioError(sec.field("t_start_s"), "not allowed with samples (first sample time is used)");
  const std::string f = sec.field("samples");
  const json& arr = sec.array("samples");
  std::vector<TimedPoint> pts;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& p = arr[i];
    if (!p.is_array() || p.size() != 3) throw ScenarioError(indexed(f, i), "must be [t, s, l]");
    pts.push_back({element(p, 0, indexed(f, i)),
                   FrenetPoint(element(p, 1, indexed(f, i)), element(p, 2, indexed(f, i)))});
  }
  try {
    FitResult fit = fit_through(pts, degree, dt);
    out.fit_residual = fit.rms_residual;
    if (fit.rms_residual > kFitWarnRms) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: fit residual %.6g m RMS exceeds %.6g m", f.c_str(),
                    fit.rms_residual, kFitWarnRms);
      out.warnings.emplace_back(buf);
    }
    return fit.spline;
  } catch (const FitError& e) {
    throw ScenarioError(f, e.what());
  }
}

ObstacleEntry parse_obstacle(const Section& sec, const UniformBSpline& ref) {
  sec.allow({"id", "static", "inflated", "frames"});
  ObstacleEntry e;
  e.prediction.id = sec.text("id", "");
  if (e.prediction.id.empty()) throw ScenarioError(sec.field("id"), "required non-empty string");
  e.prediction.is_static = sec.boolean("static", false);
  e.inflated = sec.boolean("inflated", false);
  const json& frames = sec.array("frames");
  const std::string ff = sec.field("frames");
  if (frames.empty()) throw ScenarioError(ff, "needs at least one frame");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Section fr(frames[i], indexed(ff, i));
    fr.allow({"t_s", "s_m", "l_m", "half_length_m", "half_width_m"});
    ObstacleFrame f;
    f.t = fr.number("t_s");
    f.center = FrenetPoint(fr.number("s_m"), fr.number("l_m"));
    f.half_extent_s = fr.positive("half_length_m");
    f.half_extent_l = fr.positive("half_width_m");
    if (f.t < ref.t_start() - kTimeTolerance || f.t > ref.t_end() + kTimeTolerance)
      throw ScenarioError(fr.field("t_s"), "timestamp outside the reference horizon");
    e.prediction.frames.push_back(f);
  }
  validated(sec.field("frames"), [&] { e.prediction.validate(); });
  return e;
}

HorizonPolicy parse_horizon(const Section& sec) {
  const std::string v = sec.text("horizon_policy", "persist");
  if (v == "persist") return HorizonPolicy::kPersist;
  if (v == "vanish") return HorizonPolicy::kVanish;
  throw ScenarioError(sec.field("horizon_policy"), "must be \"persist\" or \"vanish\"");
}

FaceSelection parse_faces(const Section& sec) {
  const std::string v = sec.text("face_selection", "run-consistent");
  if (v == "run-consistent") return FaceSelection::kRunConsistent;
  if (v == "nearest") return FaceSelection::kNearest;
  throw ScenarioError(sec.field("face_selection"), "must be \"run-consistent\" or \"nearest\"");
}

StopCriterion parse_criterion(const Section& sec) {
  const std::string v = sec.text("stop_criterion", "gradient-inf-norm");
  if (v == "gradient-inf-norm") return StopCriterion::kGradientInfNorm;
  if (v == "cost-delta") return StopCriterion::kCostDelta;
  throw ScenarioError(sec.field("stop_criterion"), "must be \"gradient-inf-norm\" or \"cost-delta\"");
}

const char* name_of(HorizonPolicy p) { return p == HorizonPolicy::kPersist ? "persist" : "vanish"; }
const char* name_of(FaceSelection f) {
  return f == FaceSelection::kRunConsistent ? "run-consistent" : "nearest";
}
const char* name_of(StopCriterion c) {
  return c == StopCriterion::kGradientInfNorm ? "gradient-inf-norm" : "cost-delta";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("failed writing " + path.string());
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : std::string()));
}

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void append_series(std::string& out, const std::string& stage, int iteration,
                   const std::string& t_rep, const UniformBSpline& spline, double dt) {
  for (const TrajectorySample& s : sample(spline, dt)) {
    out += stage + "," + std::to_string(iteration) + "," + t_rep + "," + num(s.t) + "," +
           num(s.position.x()) + "," + num(s.position.y()) + "," + num(s.velocity.x()) + "," +
           num(s.velocity.y()) + "," + num(s.acceleration.x()) + "," + num(s.acceleration.y()) +
           "\n";
  }
}

constexpr const char* kSeriesHeader = "stage,iteration,t_rep,t,s,l,v_s,v_l,a_s,a_l\n";

json outcome_to_json(const OptimizeOutcome& o) {
  return {{"iterations", o.iterations},
          {"termination", to_string(o.termination)},
          {"cost", o.cost}};
}

}  // namespace

json time_value(double t) {
  if (std::isinf(t)) return t > 0 ? json("inf") : json("-inf");
  return t;
}

Scenario parse_scenario(const json& doc) {
  const Section root(doc, "");
  root.allow({"schema_version", "meta", "reference", "inflation", "obstacles", "vehicle", "limits",
              "weights", "feasibility_shape", "fitting", "optimizer", "repair", "search"});
  if (!root.raw("schema_version").is_number_integer() ||
      root.raw("schema_version").get<int>() != kSchemaVersion)
    throw ScenarioError("schema_version", "must be " + std::to_string(kSchemaVersion));

  const json empty = json::object();
  auto optional = [&](const char* key) {
    return root.has(key) ? root.child(key) : Section(empty, key);
  };

  Scenario sc{.name = {}, .description = {},
              .problem = {.reference = UniformBSpline(3, std::vector<FrenetPoint>(4, FrenetPoint::Zero()), 1.0),
                          .obstacles = {}, .vehicle = {}, .limits = {},
                          .deformation_weights = {}, .refinement_weights = {}, .config = {}},
              .obstacle_entries = {}, .inflation = {}, .kappa_max_override = std::nullopt,
              .search = {}, .fit_residual = 0.0, .warnings = {}};

  const Section meta = optional("meta");
  meta.allow({"name", "description"});
  sc.name = meta.text("name", "");
  sc.description = meta.text("description", "");

  sc.problem.reference = parse_reference(root.child("reference"), sc);
  const UniformBSpline& ref = sc.problem.reference;

  const Section infl = optional("inflation");
  infl.allow({"s_offset_m", "l_offset_m"});
  sc.inflation.s_offset = infl.nonnegative("s_offset_m", 0.0);
  sc.inflation.l_offset = infl.nonnegative("l_offset_m", 0.0);

  if (root.has("obstacles")) {
    const json& arr = root.array("obstacles");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ObstacleEntry e = parse_obstacle(Section(arr[i], indexed("obstacles", i)), ref);
      if (!ids.insert(e.prediction.id).second)
        throw ScenarioError(indexed("obstacles", i) + ".id", "duplicate id " + e.prediction.id);
      sc.problem.obstacles.push_back(e.inflated ? e.prediction : inflate(e.prediction, sc.inflation));
      sc.obstacle_entries.push_back(std::move(e));
    }
  }

  const Section veh = root.child("vehicle");
  veh.allow({"wheelbase_m", "max_steering_rad", "width_m", "length_m"});
  sc.problem.vehicle.wheelbase = veh.positive("wheelbase_m");
  sc.problem.vehicle.max_steering = veh.positive("max_steering_rad");
  sc.problem.vehicle.width = veh.positive("width_m");
  sc.problem.vehicle.length = veh.positive("length_m");
  validated("vehicle", [&] { sc.problem.vehicle.validate(); });

  const Section lim = root.child("limits");
  lim.allow({"v_max_mps", "a_max_mps2", "j_max_mps3", "kappa_max_per_m"});
  if (lim.has("kappa_max_per_m")) sc.kappa_max_override = lim.positive("kappa_max_per_m");
  sc.problem.limits = VehicleLimits::from_vehicle(sc.problem.vehicle, lim.positive("v_max_mps"),
                                                  lim.positive("a_max_mps2"),
                                                  lim.positive("j_max_mps3"));
  if (sc.kappa_max_override) sc.problem.limits.kappa_max = *sc.kappa_max_override;
  validated("limits", [&] { sc.problem.limits.validate(); });

  // Top-level lambdas drive the deformation stage; lambda_f is the
  // refinement fitting weight. "refinement" may override lambda_s/lambda_d.
  const Section w = optional("weights");
  w.allow({"lambda_s", "lambda_c", "lambda_d", "lambda_f", "w_v", "w_a", "w_j", "s_f_m",
           "refinement"});
  CostWeights base;
  base.lambda_s = w.nonnegative("lambda_s", base.lambda_s);
  base.lambda_c = w.nonnegative("lambda_c", base.lambda_c);
  base.lambda_d = w.nonnegative("lambda_d", base.lambda_d);
  base.w_v = w.nonnegative("w_v", base.w_v);
  base.w_a = w.nonnegative("w_a", base.w_a);
  base.w_j = w.nonnegative("w_j", base.w_j);
  base.s_f = w.positive("s_f_m", base.s_f);
  sc.problem.deformation_weights = base;
  sc.problem.deformation_weights.lambda_f = 0.0;
  CostWeights refine = base;
  refine.lambda_c = 0.0;
  refine.lambda_f = w.nonnegative("lambda_f", 1.0);
  if (w.has("refinement")) {
    const Section r = w.child("refinement");
    r.allow({"lambda_s", "lambda_d"});
    refine.lambda_s = r.nonnegative("lambda_s", refine.lambda_s);
    refine.lambda_d = r.nonnegative("lambda_d", refine.lambda_d);
  }
  sc.problem.refinement_weights = refine;
  validated("weights", [&] {
    sc.problem.deformation_weights.validate();
    sc.problem.refinement_weights.validate();
  });

  const Section shp = optional("feasibility_shape");
  shp.allow({"elastic_lambda", "epsilon", "transition_ratio"});
  ShapeParams& sp = sc.problem.config.shape;
  sp.elastic_lambda = shp.positive("elastic_lambda", sp.elastic_lambda);
  sp.epsilon = shp.positive("epsilon", sp.epsilon);
  sp.transition_ratio = shp.positive("transition_ratio", sp.transition_ratio);
  validated("feasibility_shape", [&] { sc.problem.shape(); });

  const Section fit = optional("fitting");
  fit.allow({"samples", "axial_weight", "radial_weight"});
  FittingOptions& fo = sc.problem.config.fitting;
  fo.samples = fit.integer("samples", fo.samples);
  if (fo.samples < 2) throw ScenarioError(fit.field("samples"), "must be >= 2");
  fo.axial_weight = fit.nonnegative("axial_weight", fo.axial_weight);
  fo.radial_weight = fit.nonnegative("radial_weight", fo.radial_weight);

  const Section opt = optional("optimizer");
  opt.allow({"max_iterations", "tolerance", "history_size", "stop_criterion"});
  OptimizerConfig& oc = sc.problem.config.optimizer;
  oc.max_iterations = opt.integer("max_iterations", oc.max_iterations);
  oc.tolerance = opt.positive("tolerance", oc.tolerance);
  oc.history_size = opt.integer("history_size", oc.history_size);
  oc.criterion = parse_criterion(opt);
  validated("optimizer", [&] { oc.validate(); });

  const Section rep = optional("repair");
  rep.allow({"anchor_rounds", "horizon_policy", "face_selection"});
  sc.problem.config.anchor_rounds = rep.integer("anchor_rounds", sc.problem.config.anchor_rounds);
  if (sc.problem.config.anchor_rounds < 1)
    throw ScenarioError(rep.field("anchor_rounds"), "must be >= 1");
  sc.problem.config.horizon = parse_horizon(rep);
  sc.problem.config.faces = parse_faces(rep);

  const Section se = optional("search");
  se.allow({"delta_t_s", "time_budget_s", "collision_check_dt_s", "speed_floor_mps"});
  sc.search.delta_t = se.positive("delta_t_s", sc.search.delta_t);
  sc.search.time_budget = se.positive("time_budget_s", sc.search.time_budget);
  sc.search.collision_check_dt = se.positive("collision_check_dt_s", sc.search.collision_check_dt);
  sc.search.speed_floor = se.nonnegative("speed_floor_mps", sc.search.speed_floor);
  sc.problem.config.collision_check_dt = sc.search.collision_check_dt;
  validated("search", [&] { sc.search.validate(); });

  validated("scenario", [&] { sc.problem.validate(); });
  return sc;
}

json load_scenario_json(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ScenarioError("document", std::string("malformed JSON: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(load_scenario_json(path));
}

void apply_override(json& doc, const std::string& key, const std::string& value) {
  if (key.empty()) throw ScenarioError("--set", "empty key");
  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw ScenarioError(key, "malformed override key");
    if (!node->is_object()) throw ScenarioError(key, "override path crosses a non-object field");
    if (dot == std::string::npos) {
      json parsed;
      try {
        parsed = json::parse(value);
      } catch (const json::parse_error&) {
        parsed = value;
      }
      (*node)[part] = std::move(parsed);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    pos = dot + 1;
  }
}

json scenario_to_json(const Scenario& sc) {
  const RepairProblem& p = sc.problem;
  json cps = json::array();
  for (const FrenetPoint& q : p.reference.control_points()) cps.push_back({q.x(), q.y()});

  json obstacles = json::array();
  for (const ObstacleEntry& e : sc.obstacle_entries) {
    json frames = json::array();
    for (const ObstacleFrame& f : e.prediction.frames)
      frames.push_back({{"t_s", f.t},
                        {"s_m", f.center.x()},
                        {"l_m", f.center.y()},
                        {"half_length_m", f.half_extent_s},
                        {"half_width_m", f.half_extent_l}});
    obstacles.push_back({{"id", e.prediction.id},
                         {"static", e.prediction.is_static},
                         {"inflated", e.inflated},
                         {"frames", std::move(frames)}});
  }

  json limits = {{"v_max_mps", p.limits.v_max},
                 {"a_max_mps2", p.limits.a_max},
                 {"j_max_mps3", p.limits.j_max}};
  if (sc.kappa_max_override) limits["kappa_max_per_m"] = *sc.kappa_max_override;

  const CostWeights& d = p.deformation_weights;
  const CostWeights& r = p.refinement_weights;
  return {
      {"schema_version", kSchemaVersion},
      {"meta", {{"name", sc.name}, {"description", sc.description}}},
      {"reference",
       {{"degree", p.reference.degree()},
        {"knot_interval_s", p.reference.knot_interval()},
        {"t_start_s", p.reference.t_start()},
        {"control_points_m", std::move(cps)}}},
      {"inflation", {{"s_offset_m", sc.inflation.s_offset}, {"l_offset_m", sc.inflation.l_offset}}},
      {"obstacles", std::move(obstacles)},
      {"vehicle",
       {{"wheelbase_m", p.vehicle.wheelbase},
        {"max_steering_rad", p.vehicle.max_steering},
        {"width_m", p.vehicle.width},
        {"length_m", p.vehicle.length}}},
      {"limits", std::move(limits)},
      {"weights",
       {{"lambda_s", d.lambda_s},
        {"lambda_c", d.lambda_c},
        {"lambda_d", d.lambda_d},
        {"lambda_f", r.lambda_f},
        {"w_v", d.w_v},
        {"w_a", d.w_a},
        {"w_j", d.w_j},
        {"s_f_m", d.s_f},
        {"refinement", {{"lambda_s", r.lambda_s}, {"lambda_d", r.lambda_d}}}}},
      {"feasibility_shape",
       {{"elastic_lambda", p.config.shape.elastic_lambda},
        {"epsilon", p.config.shape.epsilon},
        {"transition_ratio", p.config.shape.transition_ratio}}},
      {"fitting",
       {{"samples", p.config.fitting.samples},
        {"axial_weight", p.config.fitting.axial_weight},
        {"radial_weight", p.config.fitting.radial_weight}}},
      {"optimizer",
       {{"max_iterations", p.config.optimizer.max_iterations},
        {"tolerance", p.config.optimizer.tolerance},
        {"history_size", p.config.optimizer.history_size},
        {"stop_criterion", name_of(p.config.optimizer.criterion)}}},
      {"repair",
       {{"anchor_rounds", p.config.anchor_rounds},
        {"horizon_policy", name_of(p.config.horizon)},
        {"face_selection", name_of(p.config.faces)}}},
      {"search",
       {{"delta_t_s", sc.search.delta_t},
        {"time_budget_s", sc.search.time_budget},
        {"collision_check_dt_s", sc.search.collision_check_dt},
        {"speed_floor_mps", sc.search.speed_floor}}},
  };
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  write_text(path, scenario_to_json(scenario).dump(2) + "\n");
}

Scenario with_reference(const Scenario& scenario, const UniformBSpline& trajectory) {
  Scenario out = scenario;
  out.problem.reference = trajectory;
  out.fit_residual = 0.0;
  out.warnings.clear();
  return out;
}

FttrResult run_pipeline(const Scenario& scenario) {
  return search(scenario.problem, scenario.search);
}

json report_to_json(const FeasibilityReport& r) {
  return {{"overall", r.overall},
          {"collision_free", r.collision_free},
          {"first_collision_time_s", time_value(r.first_collision_time)},
          {"colliding_obstacle", r.colliding_obstacle},
          {"speed_ok", r.speed_ok},
          {"acceleration_ok", r.acceleration_ok},
          {"jerk_ok", r.jerk_ok},
          {"curvature_ok", r.curvature_ok},
          {"speed_ratio", r.speed_ratio},
          {"acceleration_ratio", r.acceleration_ratio},
          {"jerk_ratio", r.jerk_ratio},
          {"max_curvature_per_m", r.max_curvature},
          {"max_lateral_acceleration_mps2", r.max_lateral_acceleration},
          {"max_longitudinal_acceleration_mps2", r.max_longitudinal_acceleration},
          {"min_speed_mps", time_value(r.min_speed)}};
}

void export_results(const ResultBundle& bundle, const std::filesystem::path& out_dir) {
  if (!bundle.scenario || !bundle.result) throw ContractViolation("incomplete result bundle");
  if (!(bundle.grid_dt > 0.0)) throw ContractViolation("grid step must be > 0");
  const Scenario& sc = *bundle.scenario;
  const FttrResult& res = *bundle.result;
  prepare_dir(out_dir);

  const FeasibilityReport gamma_report =
      is_feasible(res.gamma, sc.problem.obstacles, sc.problem.limits, sc.search.collision_check_dt,
                  sc.problem.config.horizon, sc.search.speed_floor);

  json iters = json::array();
  std::string iter_csv =
      "index,t_rep,feasible,status,bracket_start,bracket_end,elapsed_s,min_speed_mps,"
      "max_abs_a_s_mps2,max_abs_a_l_mps2,duration_scale,anchor_count\n";
  std::string series = kSeriesHeader;
  append_series(series, "reference", -1, "", sc.problem.reference, bundle.grid_dt);
  append_series(series, "gamma", -1, "", res.gamma, bundle.grid_dt);

  double elapsed_sum = 0.0;
  for (std::size_t i = 0; i < res.iterations.size(); ++i) {
    const ProbeRecord& rec = res.iterations[i];
    const auto& cand = rec.outcome.candidate;
    const auto& rep = rec.outcome.report;
    elapsed_sum += rec.elapsed_s;
    const std::string status = cand ? to_string(cand->status) : "n/a";
    json row = {{"index", i},
                {"t_rep", rec.t_rep},
                {"feasible", rec.feasible},
                {"status", status},
                {"bracket_start", rec.bracket_start},
                {"bracket_end", rec.bracket_end},
                {"elapsed_s", rec.elapsed_s}};
    if (rep) row["feasibility"] = report_to_json(*rep);
    if (cand) {
      row["duration_scale"] = cand->duration_scale;
      row["anchor_count"] = cand->anchor_count;
      json rounds = json::array();
      for (const auto& o : cand->deformation_rounds) rounds.push_back(outcome_to_json(o));
      row["deformation_rounds"] = std::move(rounds);
      row["refinement"] = outcome_to_json(cand->refinement);
    }
    iters.push_back(std::move(row));

    iter_csv += std::to_string(i) + "," + num(rec.t_rep) + "," + (rec.feasible ? "1" : "0") + "," +
                status + "," + num(rec.bracket_start) + "," + num(rec.bracket_end) + "," +
                num(rec.elapsed_s) + "," + (rep ? num(rep->min_speed) : "") + "," +
                (rep ? num(rep->max_longitudinal_acceleration) : "") + "," +
                (rep ? num(rep->max_lateral_acceleration) : "") + "," +
                (cand ? num(cand->duration_scale) : "") + "," +
                (cand ? std::to_string(cand->anchor_count) : "") + "\n";

    if (cand) {
      const std::string t = num(rec.t_rep);
      const int idx = static_cast<int>(i);
      append_series(series, "deformed", idx, t, cand->deformed, bundle.grid_dt);
      append_series(series, "refined", idx, t, cand->refined, bundle.grid_dt);
      append_series(series, "candidate", idx, t, cand->trajectory, bundle.grid_dt);
    }
  }

  const std::size_t calls = res.iterations.size();
  const json result = {
      {"schema_version", kSchemaVersion},
      {"scenario", sc.name},
      {"f_ttr_s", time_value(res.f_ttr)},
      {"ttc_s", time_value(res.ttc)},
      {"ttc_obstacle", res.ttc_obstacle},
      {"last_feasible_t_rep_s", res.last_feasible},
      {"terminated_by", to_string(res.termination)},
      {"unresolved", res.unresolved},
      {"gamma_is_reference", res.gamma_is_reference},
      {"gamma_feasibility", report_to_json(gamma_report)},
      {"timing",
       {{"total_search_time_s", res.total_time_s},
        {"planner_calls", calls},
        {"per_iteration_mean_s", calls ? elapsed_sum / static_cast<double>(calls) : 0.0}}},
      {"grid_dt_s", bundle.grid_dt},
      {"iterations", std::move(iters)},
  };

  write_text(out_dir / "result.json", result.dump(2) + "\n");
  write_text(out_dir / "iterations.csv", iter_csv);
  write_text(out_dir / "series.csv", series);
  save_scenario(with_reference(sc, res.gamma), out_dir / "gamma_scenario.json");
}

void export_repair(const Scenario& scenario, const RepairCandidate& candidate,
                   const FeasibilityReport& report, const std::filesystem::path& out_dir,
                   double grid_dt) {
  if (!(grid_dt > 0.0)) throw ContractViolation("grid step must be > 0");
  prepare_dir(out_dir);
  json rounds = json::array();
  for (const auto& o : candidate.deformation_rounds) rounds.push_back(outcome_to_json(o));
  const json doc = {{"schema_version", kSchemaVersion},
                    {"scenario", scenario.name},
                    {"t_rep_s", candidate.t_rep},
                    {"junction_time_s", candidate.junction_time},
                    {"first_free_control", candidate.first_free},
                    {"status", to_string(candidate.status)},
                    {"message", candidate.message},
                    {"duration_scale", candidate.duration_scale},
                    {"anchor_count", candidate.anchor_count},
                    {"deformation_rounds", std::move(rounds)},
                    {"refinement", outcome_to_json(candidate.refinement)},
                    {"feasibility", report_to_json(report)},
                    {"grid_dt_s", grid_dt}};

  std::string series = kSeriesHeader;
  const std::string t = num(candidate.t_rep);
  append_series(series, "reference", -1, "", scenario.problem.reference, grid_dt);
  append_series(series, "deformed", 0, t, candidate.deformed, grid_dt);
  append_series(series, "refined", 0, t, candidate.refined, grid_dt);
  append_series(series, "candidate", 0, t, candidate.trajectory, grid_dt);

  write_text(out_dir / "repair.json", doc.dump(2) + "\n");
  write_text(out_dir / "series.csv", series);
  save_scenario(with_reference(scenario, candidate.trajectory), out_dir / "candidate_scenario.json");
}

}  // namespace trajrepair
