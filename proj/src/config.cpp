#include "reachkit/config.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "reachkit/errors.hpp"
#include "reachkit/rng.hpp"

namespace reachkit {

using nlohmann::json;

namespace {

// 1-based line of the first `"key"` after the first `"section"` in the
// source text, or 0 when it cannot be located.
int locate(const std::string& source, const std::string& section, const std::string& key) {
  if (source.empty()) return 0;
  std::size_t pos = 0;
  if (!section.empty()) {
    pos = source.find('"' + section + '"');
    if (pos == std::string::npos) return 0;
  }
  if (!key.empty()) {
    const auto k = source.find('"' + key + '"', pos + (section.empty() ? 0 : 1));
    if (k != std::string::npos) pos = k;
  }
  return 1 + static_cast<int>(std::count(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
 public:
  Reader(const json& root, const std::string& source) : root_(root), source_(source) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    std::string path = section.empty() ? key : (key.empty() ? section : section + "." + key);
    std::string msg = "config";
    const int line = locate(source_, section, key);
    if (line > 0) msg += " line " + std::to_string(line);
    throw ConfigError(msg + ": " + path + ": " + what);
  }

  const json* section(const std::string& name) const {
    if (!root_.contains(name)) return nullptr;
    const json& s = root_.at(name);
    if (!s.is_object()) fail(name, "", "expected an object");
    return &s;
  }

  void only(const std::string& name, const json* s, std::initializer_list<const char*> keys) const {
    if (s == nullptr) return;
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : s->items()) {
      if (!allowed.contains(k)) fail(name, k, "unknown key");
    }
  }

  template <class T>
  void get(const std::string& name, const json* s, const char* key, T& out) const {
    if (s == nullptr || !s->contains(key)) return;
    try {
      out = s->at(key).get<T>();
    } catch (const json::exception&) {
      fail(name, key, "wrong type");
    }
  }

 private:
  const json& root_;
  const std::string& source_;
};

json bounds_json(const BoxBounds& b, bool lo) { return lo ? json{b.lo[0], b.lo[1]} : json{b.hi[0], b.hi[1]}; }

}  // namespace

Grid3 GridSpec::build() const {
  return Grid3({lo[0], hi[0], counts[0], false}, {lo[1], hi[1], counts[1], false},
               {-std::numbers::pi, std::numbers::pi, counts[2], true});
}

ControlAffineModel ModelSpec::build() const { return preset.empty() ? custom : reachkit::preset(preset); }

json grid_to_json(const Grid3& g) {
  json axes = json::array();
  for (std::size_t d = 0; d < 3; ++d) {
    const auto& a = g.axis(d);
    axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}, {"periodic", a.periodic}});
  }
  return axes;
}

json to_json(const RunConfig& c) {
  json model;
  if (!c.model.preset.empty()) {
    model = {{"preset", c.model.preset}};
  } else {
    const auto& m = c.model.custom;
    model = {{"name", m.name},
             {"v_nominal", m.v_nominal},
             {"action_lo", bounds_json(m.action, true)},
             {"action_hi", bounds_json(m.action, false)},
             {"disturbance_lo", bounds_json(m.disturbance, true)},
             {"disturbance_hi", bounds_json(m.disturbance, false)}};
  }
  json tasks = {{"count", c.tasks.count},
                {"ring_radius", c.tasks.ring_radius},
                {"goal_radius", c.tasks.goal_radius},
                {"goal_jitter", c.tasks.goal_jitter},
                {"rollouts_per_task", c.tasks.rollouts_per_task}};
  if (!c.tasks.file.empty()) tasks["file"] = c.tasks.file;
  json icl = {{"epochs", c.icl.epochs}, {"epsilon", c.icl.epsilon}, {"threshold", c.icl.threshold},
              {"expert", c.icl.expert}};
  if (!c.icl.demos_file.empty()) icl["demos_file"] = c.icl.demos_file;
  return {
      {"seed", c.seed},
      {"grid", {{"lo", c.grid.lo}, {"hi", c.grid.hi}, {"counts", c.grid.counts}}},
      {"model", model},
      {"obstacle", {{"center", {c.obstacle.cx, c.obstacle.cy}}, {"radius", c.obstacle.radius}}},
      {"tasks", tasks},
      {"mdp",
       {{"dt", c.mdp.dt},
        {"horizon", c.mdp.horizon},
        {"tau", c.mdp.tau},
        {"penalty", c.mdp.penalty},
        {"goal_bonus", c.mdp.goal_bonus},
        {"action_samples", c.mdp.action_samples},
        {"disturbance_mode", to_string(c.mdp.disturbance)},
        {"transition", to_string(c.mdp.scheme)}}},
      {"icl", icl},
      {"solver", {{"tolerance", c.solver.tolerance}, {"cfl", c.solver.cfl}, {"max_iters", c.solver.max_iters}}},
      {"output",
       {{"dir", c.output.dir}, {"slices", c.output.slices}, {"support_threshold", c.output.support_threshold}}},
      {"eval", {{"seeds", c.eval.seeds}}},
      {"transfer", {{"presets", c.transfer.presets}}},
  };
}

RunConfig config_from_json(const json& j, const std::string& source) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  Reader r(j, source);
  RunConfig c;
  r.only("", &j, {"seed", "grid", "model", "obstacle", "tasks", "mdp", "icl", "solver", "output", "eval", "transfer"});
  r.get("", &j, "seed", c.seed);

  const json* grid = r.section("grid");
  r.only("grid", grid, {"lo", "hi", "counts"});
  r.get("grid", grid, "lo", c.grid.lo);
  r.get("grid", grid, "hi", c.grid.hi);
  r.get("grid", grid, "counts", c.grid.counts);
  for (int d = 0; d < 2; ++d) {
    if (!(c.grid.lo[d] < c.grid.hi[d])) r.fail("grid", "hi", "must exceed lo on every axis");
  }
  for (auto n : c.grid.counts) {
    if (n < 3) r.fail("grid", "counts", "every axis needs at least 3 cells");
  }

  const json* model = r.section("model");
  r.only("model", model, {"preset", "name", "v_nominal", "action_lo", "action_hi", "disturbance_lo", "disturbance_hi"});
  if (model != nullptr && !model->contains("preset")) {
    c.model.preset.clear();
    auto& m = c.model.custom;
    r.get("model", model, "name", m.name);
    r.get("model", model, "v_nominal", m.v_nominal);
    r.get("model", model, "action_lo", m.action.lo);
    r.get("model", model, "action_hi", m.action.hi);
    r.get("model", model, "disturbance_lo", m.disturbance.lo);
    r.get("model", model, "disturbance_hi", m.disturbance.hi);
    for (int d = 0; d < 2; ++d) {
      if (m.action.lo[d] > m.action.hi[d]) r.fail("model", "action_hi", "must be >= action_lo");
      if (m.disturbance.lo[d] > m.disturbance.hi[d]) r.fail("model", "disturbance_hi", "must be >= disturbance_lo");
    }
  } else {
    r.get("model", model, "preset", c.model.preset);
    try {
      (void)preset(c.model.preset);
    } catch (const ConfigError&) {
      r.fail("model", "preset", "unknown preset '" + c.model.preset + "'");
    }
  }

  const json* obstacle = r.section("obstacle");
  r.only("obstacle", obstacle, {"center", "radius"});
  std::array<double, 2> center{c.obstacle.cx, c.obstacle.cy};
  r.get("obstacle", obstacle, "center", center);
  c.obstacle.cx = center[0];
  c.obstacle.cy = center[1];
  r.get("obstacle", obstacle, "radius", c.obstacle.radius);
  if (!(c.obstacle.radius > 0.0)) r.fail("obstacle", "radius", "must be positive");

  const json* tasks = r.section("tasks");
  r.only("tasks", tasks, {"count", "ring_radius", "goal_radius", "goal_jitter", "rollouts_per_task", "file"});
  r.get("tasks", tasks, "count", c.tasks.count);
  r.get("tasks", tasks, "ring_radius", c.tasks.ring_radius);
  r.get("tasks", tasks, "goal_radius", c.tasks.goal_radius);
  r.get("tasks", tasks, "goal_jitter", c.tasks.goal_jitter);
  r.get("tasks", tasks, "rollouts_per_task", c.tasks.rollouts_per_task);
  r.get("tasks", tasks, "file", c.tasks.file);
  if (c.tasks.count < 1) r.fail("tasks", "count", "must be >= 1");
  if (!(c.tasks.ring_radius > 0.0)) r.fail("tasks", "ring_radius", "must be positive");
  if (!(c.tasks.goal_radius > 0.0)) r.fail("tasks", "goal_radius", "must be positive");
  if (c.tasks.goal_jitter < 0.0) r.fail("tasks", "goal_jitter", "must be >= 0");
  if (c.tasks.rollouts_per_task < 0) r.fail("tasks", "rollouts_per_task", "must be >= 0");

  const json* mdp = r.section("mdp");
  r.only("mdp", mdp,
         {"dt", "horizon", "tau", "penalty", "goal_bonus", "action_samples", "disturbance_mode", "transition"});
  r.get("mdp", mdp, "dt", c.mdp.dt);
  r.get("mdp", mdp, "horizon", c.mdp.horizon);
  r.get("mdp", mdp, "tau", c.mdp.tau);
  r.get("mdp", mdp, "penalty", c.mdp.penalty);
  r.get("mdp", mdp, "goal_bonus", c.mdp.goal_bonus);
  r.get("mdp", mdp, "action_samples", c.mdp.action_samples);
  std::string mode = to_string(c.mdp.disturbance), scheme = to_string(c.mdp.scheme);
  r.get("mdp", mdp, "disturbance_mode", mode);
  r.get("mdp", mdp, "transition", scheme);
  try {
    c.mdp.disturbance = disturbance_mode_from(mode);
  } catch (const ConfigError& e) {
    r.fail("mdp", "disturbance_mode", e.what());
  }
  try {
    c.mdp.scheme = transition_scheme_from(scheme);
  } catch (const ConfigError& e) {
    r.fail("mdp", "transition", e.what());
  }
  if (!(c.mdp.dt > 0.0)) r.fail("mdp", "dt", "must be positive");
  if (c.mdp.horizon < 1) r.fail("mdp", "horizon", "must be >= 1");
  if (!(c.mdp.tau > 0.0)) r.fail("mdp", "tau", "must be positive");
  if (!(c.mdp.penalty > 0.0)) r.fail("mdp", "penalty", "must be positive");
  if (c.mdp.action_samples < 2) r.fail("mdp", "action_samples", "must be >= 2");

  const json* icl = r.section("icl");
  r.only("icl", icl, {"epochs", "epsilon", "threshold", "expert", "demos_file"});
  r.get("icl", icl, "epochs", c.icl.epochs);
  r.get("icl", icl, "epsilon", c.icl.epsilon);
  r.get("icl", icl, "threshold", c.icl.threshold);
  r.get("icl", icl, "expert", c.icl.expert);
  r.get("icl", icl, "demos_file", c.icl.demos_file);
  if (c.icl.epochs < 1) r.fail("icl", "epochs", "must be >= 1");
  if (!(c.icl.epsilon > 0.0)) r.fail("icl", "epsilon", "must be positive");
  if (!(c.icl.threshold > -1.0 && c.icl.threshold < 1.0)) r.fail("icl", "threshold", "must lie in (-1, 1)");
  if (c.icl.expert != "exact" && c.icl.expert != "demos") r.fail("icl", "expert", "must be 'exact' or 'demos'");

  const json* solver = r.section("solver");
  r.only("solver", solver, {"tolerance", "cfl", "max_iters"});
  r.get("solver", solver, "tolerance", c.solver.tolerance);
  r.get("solver", solver, "cfl", c.solver.cfl);
  r.get("solver", solver, "max_iters", c.solver.max_iters);
  if (!(c.solver.tolerance > 0.0)) r.fail("solver", "tolerance", "must be positive");
  if (!(c.solver.cfl > 0.0 && c.solver.cfl <= 1.0)) r.fail("solver", "cfl", "must lie in (0, 1]");
  if (c.solver.max_iters < 1) r.fail("solver", "max_iters", "must be >= 1");

  const json* output = r.section("output");
  r.only("output", output, {"dir", "slices", "support_threshold"});
  r.get("output", output, "dir", c.output.dir);
  r.get("output", output, "slices", c.output.slices);
  r.get("output", output, "support_threshold", c.output.support_threshold);
  if (!(c.output.support_threshold > 0.0)) r.fail("output", "support_threshold", "must be positive");

  const json* eval = r.section("eval");
  r.only("eval", eval, {"seeds"});
  r.get("eval", eval, "seeds", c.eval.seeds);

  const json* transfer = r.section("transfer");
  r.only("transfer", transfer, {"presets"});
  r.get("transfer", transfer, "presets", c.transfer.presets);
  if (c.transfer.presets.size() != 3) r.fail("transfer", "presets", "expects three presets, most agile first");
  for (const auto& p : c.transfer.presets) {
    try {
      (void)preset(p);
    } catch (const ConfigError&) {
      r.fail("transfer", "presets", "unknown preset '" + p + "'");
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, text);
}

json task_to_json(const Task& t) {
  return {{"id", t.id},
          {"start", {t.start.x, t.start.y, t.start.theta}},
          {"goal", {t.goal[0], t.goal[1]}},
          {"goal_radius", t.goal_radius}};
}

Task task_from_json(const json& j) {
  try {
    Task t;
    t.id = j.at("id").get<int>();
    const auto s = j.at("start").get<std::array<double, 3>>();
    t.start = {s[0], s[1], s[2]};
    t.goal = j.at("goal").get<std::array<double, 2>>();
    t.goal_radius = j.value("goal_radius", 0.3);
    if (!(t.goal_radius > 0.0)) throw ConfigError("task goal_radius must be positive");
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed task record: ") + e.what());
  }
}

std::vector<Task> load_tasks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open task file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw ConfigError(path.string() + ": expected a JSON array of tasks");
  std::vector<Task> out;
  for (const auto& t : j) out.push_back(task_from_json(t));
  return out;
}

void save_tasks(const std::filesystem::path& path, const std::vector<Task>& tasks) {
  json j = json::array();
  for (const auto& t : tasks) j.push_back(task_to_json(t));
  std::ofstream(path) << j.dump(2) << '\n';
}

std::vector<Task> make_tasks(const RunConfig& config) {
  if (!config.tasks.file.empty()) return load_tasks(config.tasks.file);
  return ring_tasks(config.tasks.count, config.tasks.ring_radius, config.tasks.goal_radius,
                    derive_seed(config.seed, "tasks"),
                    config.tasks.goal_jitter);
}

}  // namespace reachkit
