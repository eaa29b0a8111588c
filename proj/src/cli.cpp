#include "reachkit/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "reachkit/config.hpp"
#include "reachkit/errors.hpp"
#include "reachkit/eval.hpp"
#include "reachkit/field_io.hpp"
#include "reachkit/icl.hpp"
#include "reachkit/parallel.hpp"
#include "reachkit/reachability.hpp"
#include "reachkit/rng.hpp"
#include "reachkit/svg.hpp"
#include "reachkit/tasks.hpp"
#include "reachkit/trajectory_io.hpp"

namespace reachkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Manifest {
 public:
  Manifest(std::string command, const RunConfig& config) {
    doc_ = {{"command", std::move(command)},
            {"version", kVersion},
            {"seed", config.seed},
            {"config", to_json(config)},
            {"artifacts", json::array()},
            {"stages", json::object()}};
  }

  template <class F>
  auto stage(const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
      doc_["stages"][name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      finish();
    } else {
      auto out = body();
      finish();
      return out;
    }
  }

  void add(const fs::path& p) { doc_["artifacts"].push_back(p.string()); }
  json& doc() { return doc_; }

  void write(const fs::path& path) {
    add(path);
    std::ofstream(path) << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
};

void write_json(const fs::path& path, const json& j, Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  manifest.add(path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing input " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

fs::path require_file(const fs::path& p, const std::string& hint) {
  if (!fs::exists(p)) throw ConfigError("missing input " + p.string() + " (" + hint + ")");
  return p;
}

std::string id_list(const std::vector<int>& ids) {
  std::string s;
  for (int id : ids) s += (s.empty() ? "" : ", ") + std::to_string(id);
  return s;
}

json report_json(const ClassificationReport& r) {
  return {{"accuracy", r.accuracy}, {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
          {"iou", r.iou},           {"tp", r.tp},               {"fp", r.fp},         {"fn", r.fn},
          {"tn", r.tn},             {"support", r.support},     {"restriction", r.restriction}};
}

struct Context {
  RunConfig config;
  fs::path out;
  Grid3 grid;
  ControlAffineModel model;

  explicit Context(RunConfig c)
      : config(std::move(c)), out(config.output.dir), grid(config.grid.build()), model(config.model.build()) {}
  fs::path dir(const std::string& name) const {
    const fs::path p = out / name;
    fs::create_directories(p);
    return p;
  }
};

// ---------------------------------------------------------------- brt

struct BrtArtifacts {
  BRTResult result;
  BoolMask failure;
};

BrtArtifacts solve_and_write_brt(const Context& ctx, Manifest& manifest) {
  const fs::path dir = ctx.dir("brt");
  const ScalarField h = failure_sdf(ctx.config.obstacle, ctx.grid);
  BrtArtifacts a{manifest.stage("solve", [&] { return solve_brt(ctx.model, h, ctx.config.solver); }),
                 sublevel_set(h, 0.0)};
  manifest.stage("write", [&] {
    write_field(dir / "value.vfld", a.result.value);
    write_mask(dir / "mask.vfld", a.result.unsafe);
    write_mask(dir / "failure.vfld", a.failure);
    for (const char* f : {"value.vfld", "mask.vfld", "failure.vfld"}) manifest.add(dir / f);
    json side = {{"iterations", a.result.iterations},
                 {"residual", a.result.residual},
                 {"converged", a.result.converged},
                 {"model_name", ctx.model.name},
                 {"grid", grid_to_json(ctx.grid)},
                 {"unsafe_cells", a.result.unsafe.count()},
                 {"failure_cells", a.failure.count()}};
    write_json(dir / "brt.json", side, manifest);
    for (const auto& p : write_slice_svgs(dir, "slice", ctx.grid, ctx.config.obstacle, ctx.config.output.slices,
                                          {{"BRT", "#c0392b", a.result.value, 0.0}})) {
      manifest.add(p);
    }
  });
  return a;
}

// Reads brt/ when it was produced for the same model and grid.
std::optional<BrtArtifacts> load_brt(const Context& ctx) {
  const fs::path dir = ctx.out / "brt";
  if (!fs::exists(dir / "brt.json") || !fs::exists(dir / "mask.vfld")) return std::nullopt;
  const json side = read_json(dir / "brt.json");
  if (side.value("model_name", "") != ctx.model.name) return std::nullopt;
  BrtArtifacts a{{read_field(dir / "value.vfld"), read_mask(dir / "mask.vfld")}, read_mask(dir / "failure.vfld")};
  require_same_grid(a.result.unsafe.grid(), ctx.grid, "brt artifacts vs config grid");
  a.result.iterations = side.value("iterations", 0);
  a.result.residual = side.value("residual", 0.0);
  a.result.converged = side.value("converged", false);
  return a;
}

int cmd_brt(const Context& ctx) {
  Manifest manifest("brt", ctx.config);
  const auto a = solve_and_write_brt(ctx, manifest);
  manifest.write(ctx.dir("brt") / "manifest.json");
  std::cout << "brt: model " << ctx.model.name << ", " << a.result.unsafe.count() << " unsafe cells ("
            << a.failure.count() << " in the failure set), " << a.result.iterations << " sweeps, residual "
            << a.result.residual << (a.result.converged ? "" : " [not converged]") << '\n';
  return a.result.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------- demos

struct ExpertRun {
  ScalarField density;
  std::vector<TrajectoryRecord> records;
  std::size_t trajectories = 0;
};

ExpertRun run_experts(const TabularMDP& mdp, const std::vector<Task>& tasks, const BoolMask& failure,
                      std::uint64_t seed, int rollouts_per_task) {
  ExpertRun run{ScalarField(mdp.grid()), {}, 0};
  const std::uint64_t stream = derive_seed(seed, "demos");
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto sol = soft_cvi(mdp, tasks[k], failure);
    const auto rho = visitation_exact(mdp, sol.policy, tasks[k]);
    for (std::size_t n = 0; n < rho.size(); ++n) run.density[n] += rho[n];
    for (int r = 0; r < rollouts_per_task; ++r) {
      const auto traj =
          rollout(mdp, sol.policy, tasks[k], derive_seed(stream, k * static_cast<std::uint64_t>(rollouts_per_task) + r));
      run.records.insert(run.records.end(), traj.begin(), traj.end());
      ++run.trajectories;
    }
  }
  return run;
}

void check_tasks(const Context& ctx, const std::vector<Task>& tasks, const BoolMask& unsafe) {
  for (const auto& t : tasks) {
    if (!ctx.grid.contains_xy(t.goal[0], t.goal[1])) {
      throw ConfigError("task " + std::to_string(t.id) + ": goal lies outside the grid");
    }
  }
  const auto bad = infeasible_tasks(ctx.grid, tasks, unsafe);
  if (!bad.empty()) throw InfeasibleError("tasks start inside the unsafe set: " + id_list(bad));
}

int cmd_demos(const Context& ctx) {
  Manifest manifest("demos", ctx.config);
  const auto tasks = make_tasks(ctx.config);
  auto brt = load_brt(ctx);
  if (!brt) brt = solve_and_write_brt(ctx, manifest);
  check_tasks(ctx, tasks, brt->result.unsafe | brt->failure);

  const fs::path dir = ctx.dir("demos");
  const TabularMDP mdp = manifest.stage("mdp", [&] { return TabularMDP(ctx.grid, ctx.model, ctx.config.mdp); });
  const ExpertRun run = manifest.stage("experts", [&] {
    return run_experts(mdp, tasks, brt->failure, ctx.config.seed, ctx.config.tasks.rollouts_per_task);
  });
  manifest.stage("write", [&] {
    save_tasks(dir / "tasks.json", tasks);
    manifest.add(dir / "tasks.json");
    write_jsonl(dir / "demos.jsonl", run.records);
    manifest.add(dir / "demos.jsonl");
    write_field(dir / "expert_density.vfld", run.density);
    manifest.add(dir / "expert_density.vfld");
    const double total = run.density.sum();
    write_json(dir / "demos.json",
               {{"tasks", tasks.size()},
                {"rollouts_per_task", ctx.config.tasks.rollouts_per_task},
                {"trajectories", run.trajectories},
                {"records", run.records.size()},
                {"horizon", ctx.config.mdp.horizon},
                {"expert_mass_in_brt", mass_in(run.density, brt->result.unsafe) / total},
                {"expert_mass_in_failure", mass_in(run.density, brt->failure) / total}},
               manifest);
  });
  manifest.write(dir / "manifest.json");
  std::cout << "demos: " << tasks.size() << " tasks, " << run.trajectories << " trajectories, " << run.records.size()
            << " records\n";
  return kExitOk;
}

// ---------------------------------------------------------------- icl

ScalarField load_expert_density(const Context& ctx) {
  const fs::path demos = ctx.out / "demos";
  if (!ctx.config.icl.demos_file.empty()) {
    return empirical_density(ctx.grid, read_jsonl(require_file(ctx.config.icl.demos_file, "icl.demos_file")),
                             ctx.config.mdp.horizon);
  }
  if (ctx.config.icl.expert == "demos") {
    return empirical_density(ctx.grid, read_jsonl(require_file(demos / "demos.jsonl", "run `demos` first")),
                             ctx.config.mdp.horizon);
  }
  return read_field(require_file(demos / "expert_density.vfld", "run `demos` first"));
}

std::vector<Task> load_run_tasks(const Context& ctx) {
  const fs::path p = ctx.out / "demos" / "tasks.json";
  if (fs::exists(p)) return load_tasks(p);
  if (!ctx.config.tasks.file.empty()) return load_tasks(ctx.config.tasks.file);
  throw ConfigError("missing input " + p.string() + " (run `demos` first or set tasks.file)");
}

ICLConfig icl_config(const RunConfig& c, std::vector<Task> tasks) {
  ICLConfig ic;
  ic.epochs = c.icl.epochs;
  ic.tasks = std::move(tasks);
  ic.epsilon = c.icl.epsilon;
  ic.penalty = c.mdp.penalty;
  ic.tau = c.mdp.tau;
  ic.threshold = c.icl.threshold;
  return ic;
}

struct LabelSet {
  BoolMask brt;
  BoolMask failure;
};

json four_reports(const BoolMask& predicted, const LabelSet& labels, const BoolMask& support) {
  return {{"brt_full_grid", report_json(classification_report(predicted, labels.brt))},
          {"brt_visited_support", report_json(classification_report(predicted, labels.brt, support))},
          {"failure_full_grid", report_json(classification_report(predicted, labels.failure))},
          {"failure_visited_support", report_json(classification_report(predicted, labels.failure, support))}};
}

int cmd_icl(const Context& ctx) {
  Manifest manifest("icl", ctx.config);
  const auto tasks = load_run_tasks(ctx);
  const ScalarField expert = load_expert_density(ctx);
  require_same_grid(expert.grid(), ctx.grid, "expert density vs config grid");
  const TabularMDP mdp = manifest.stage("mdp", [&] { return TabularMDP(ctx.grid, ctx.model, ctx.config.mdp); });
  const ICLHistory history =
      manifest.stage("icl", [&] { return run_mt_icl_from_density(icl_config(ctx.config, tasks), mdp, expert); });

  const fs::path dir = ctx.dir("icl");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".vfld" || entry.path().extension() == ".json") fs::remove(entry.path());
  }
  json constraints = json::array();
  json epochs = json::array();
  manifest.stage("write", [&] {
    for (std::size_t e = 0; e < history.constraints.size(); ++e) {
      const auto& c = history.constraints[e];
      const std::string stem = "constraint_" + std::to_string(c.epoch);
      write_field(dir / (stem + ".vfld"), c.values);
      manifest.add(dir / (stem + ".vfld"));
      write_json(dir / (stem + ".json"), {{"threshold", c.threshold}, {"epsilon", c.epsilon}, {"epoch", c.epoch}},
                 manifest);
      write_field(dir / ("learner_" + std::to_string(c.epoch) + ".vfld"), history.learner_densities[e]);
      manifest.add(dir / ("learner_" + std::to_string(c.epoch) + ".vfld"));
      constraints.push_back((stem + ".vfld"));
      const auto& m = history.metrics[e];
      epochs.push_back({{"epoch", m.epoch},
                        {"unsafe_cells", m.unsafe_cells},
                        {"learner_mass_in_unsafe", m.learner_mass_in_unsafe},
                        {"expert_mass_in_unsafe", m.expert_mass_in_unsafe}});
    }
    write_field(dir / "expert_density.vfld", expert);
    manifest.add(dir / "expert_density.vfld");
    const BoolMask unsafe = history.constraints.back().unsafe();
    write_mask(dir / "unsafe.vfld", unsafe);
    manifest.add(dir / "unsafe.vfld");

    json metrics = {{"epochs", epochs}};
    if (const auto brt = load_brt(ctx)) {
      const BoolMask support = visited_support(learner_mixture(history), expert, ctx.config.output.support_threshold);
      metrics["final"] = four_reports(unsafe, {brt->result.unsafe, brt->failure}, support);
    }
    write_json(dir / "metrics.json", metrics, manifest);
  });
  manifest.doc()["epochs"] = history.constraints.size();
  manifest.doc()["constraints"] = constraints;
  manifest.write(dir / "manifest.json");
  const auto& last = history.metrics.back();
  std::cout << "icl: " << history.constraints.size() << " epochs, final unsafe cells " << last.unsafe_cells
            << ", expert mass in unsafe " << last.expert_mass_in_unsafe << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- eval

json aggregate(const std::vector<json>& runs) {
  json out;
  for (const char* block : {"brt_full_grid", "brt_visited_support", "failure_full_grid", "failure_visited_support"}) {
    for (const char* metric : {"accuracy", "precision", "recall", "f1", "iou"}) {
      double sum = 0.0;
      for (const auto& r : runs) sum += r[block][metric].get<double>();
      const double mean = sum / static_cast<double>(runs.size());
      double ss = 0.0;
      for (const auto& r : runs) ss += std::pow(r[block][metric].get<double>() - mean, 2);
      const double sd = runs.size() > 1 ? std::sqrt(ss / static_cast<double>(runs.size() - 1)) : 0.0;
      out[block][metric] = {{"mean", mean}, {"stddev", sd}};
    }
  }
  return out;
}

int cmd_eval(const Context& ctx) {
  Manifest manifest("eval", ctx.config);
  const fs::path icl_dir = ctx.out / "icl";
  const fs::path brt_dir = ctx.out / "brt";
  const BoolMask brt = read_mask(require_file(brt_dir / "mask.vfld", "run `brt` first"));
  const ScalarField brt_value = read_field(require_file(brt_dir / "value.vfld", "run `brt` first"));
  const BoolMask failure = fs::exists(brt_dir / "failure.vfld") ? read_mask(brt_dir / "failure.vfld")
                                                                 : failure_mask(ctx.config.obstacle, brt.grid());
  const json icl_manifest = read_json(require_file(icl_dir / "manifest.json", "run `icl` first"));
  const auto& files = icl_manifest.at("constraints");
  if (files.empty()) throw FormatError("icl manifest lists no constraints");
  const fs::path last = icl_dir / files.back().get<std::string>();
  ConstraintField constraint{read_field(last)};
  const json side = read_json(fs::path(last).replace_extension(".json"));
  constraint.threshold = side.value("threshold", 0.6);
  constraint.epsilon = side.value("epsilon", 1e-9);
  constraint.epoch = side.value("epoch", 0);

  require_same_grid(brt.grid(), failure.grid(), "brt vs failure artifacts");
  require_same_grid(brt.grid(), constraint.values.grid(), "brt vs constraint artifacts");
  const ScalarField expert = read_field(require_file(icl_dir / "expert_density.vfld", "run `icl` first"));
  require_same_grid(brt.grid(), expert.grid(), "brt vs expert density artifacts");
  std::vector<ScalarField> learners;
  for (int e = 1; e <= constraint.epoch; ++e) {
    learners.push_back(read_field(require_file(icl_dir / ("learner_" + std::to_string(e) + ".vfld"), "icl output")));
    require_same_grid(brt.grid(), learners.back().grid(), "brt vs learner density artifacts");
  }
  ScalarField mixture = aggregate_density(learners);
  for (auto& v : mixture.values()) v /= static_cast<double>(learners.size());

  const BoolMask unsafe = constraint.unsafe();
  const LabelSet labels{brt, failure};
  const BoolMask support = visited_support(mixture, expert, ctx.config.output.support_threshold);
  json metrics = {{"epoch", constraint.epoch},
                  {"threshold", constraint.threshold},
                  {"unsafe_cells", unsafe.count()},
                  {"brt_cells", brt.count()},
                  {"failure_cells", failure.count()},
                  {"support_cells", support.count()},
                  {"reports", four_reports(unsafe, labels, support)}};

  if (!ctx.config.eval.seeds.empty()) {
    // Reruns the seed-dependent part (task sampling, experts, ICL) per seed.
    require_same_grid(brt.grid(), ctx.grid, "brt artifacts vs config grid");
    const TabularMDP mdp = manifest.stage("mdp", [&] { return TabularMDP(ctx.grid, ctx.model, ctx.config.mdp); });
    std::vector<json> runs;
    json per_seed = json::object();
    for (const auto seed : ctx.config.eval.seeds) {
      manifest.stage("seed_" + std::to_string(seed), [&] {
        RunConfig c = ctx.config;
        c.seed = seed;
        const auto tasks = make_tasks(c);
        check_tasks(ctx, tasks, brt | failure);
        const ScalarField ex = run_experts(mdp, tasks, failure, seed, 0).density;
        const auto h = run_mt_icl_from_density(icl_config(c, tasks), mdp, ex);
        const BoolMask sup = visited_support(learner_mixture(h), ex, c.output.support_threshold);
        runs.push_back(four_reports(h.constraints.back().unsafe(), labels, sup));
        per_seed[std::to_string(seed)] = runs.back();
      });
    }
    metrics["seeds"] = {{"values", ctx.config.eval.seeds}, {"runs", per_seed}, {"aggregate", aggregate(runs)}};
  }

  const fs::path dir = ctx.dir("eval");
  write_json(dir / "metrics.json", metrics, manifest);
  for (const auto& p :
       write_slice_svgs(dir, "overlay", brt.grid(), ctx.config.obstacle, ctx.config.output.slices,
                        {{"BRT", "#c0392b", brt_value, 0.0},
                         {"inferred constraint", "#2471a3", constraint.values, constraint.threshold}})) {
    manifest.add(p);
  }
  manifest.write(dir / "manifest.json");
  const auto& r = metrics["reports"];
  std::cout << "eval: F1 vs BRT " << r["brt_visited_support"]["f1"].get<double>() << " (visited support), "
            << r["brt_full_grid"]["f1"].get<double>() << " (full grid); F1 vs failure set "
            << r["failure_visited_support"]["f1"].get<double>() << " / " << r["failure_full_grid"]["f1"].get<double>()
            << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- transfer

json transfer_json(const std::string& scenario, const TransferReport& r) {
  json tasks = json::array();
  for (const auto& t : r.tasks) {
    tasks.push_back({{"id", t.id},
                     {"feasible", t.feasible},
                     {"return_borrowed", t.return_borrowed},
                     {"return_own", t.return_own},
                     {"failure_mass_borrowed", t.failure_mass_borrowed},
                     {"failure_mass_own", t.failure_mass_own}});
  }
  return {{"scenario", scenario},
          {"source", r.source},
          {"target", r.target},
          {"mean_return_borrowed", r.mean_return_borrowed},
          {"mean_return_own", r.mean_return_own},
          {"relative_gap", r.relative_gap},
          {"conservative", r.conservative},
          {"lifted_volume", r.lifted_volume},
          {"own_in_lifted", r.own_in_lifted},
          {"infeasible", r.infeasible},
          {"tasks", tasks}};
}

int cmd_transfer(const Context& ctx) {
  Manifest manifest("transfer", ctx.config);
  const fs::path dir = ctx.dir("transfer");
  const auto& names = ctx.config.transfer.presets;  // most agile first
  const ScalarField h = failure_sdf(ctx.config.obstacle, ctx.grid);
  const BoolMask failure = sublevel_set(h, 0.0);
  std::map<std::string, BoolMask> brts;
  bool converged = true;
  for (const auto& name : names) {
    if (brts.contains(name)) continue;
    const auto r = manifest.stage("brt_" + name, [&] { return solve_brt(preset(name), h, ctx.config.solver); });
    converged = converged && r.converged;
    write_mask(dir / ("brt_" + name + ".vfld"), r.unsafe);
    manifest.add(dir / ("brt_" + name + ".vfld"));
    brts.emplace(name, r.unsafe);
  }
  const auto tasks = make_tasks(ctx.config);

  struct Scenario {
    std::string name, target, source;
  };
  const std::vector<Scenario> scenarios = {{"agile_to_less_agile", names[2], names[0]},
                                           {"non_agile_to_more_agile", names[0], names[2]},
                                           {"moderate_to_non_agile", names[2], names[1]}};
  std::map<std::string, TabularMDP> mdps;
  json blocks = json::array();
  int failed = 0;
  for (const auto& s : scenarios) {
    if (!mdps.contains(s.target)) {
      mdps.emplace(s.target, manifest.stage("mdp_" + s.target,
                                            [&] { return TabularMDP(ctx.grid, preset(s.target), ctx.config.mdp); }));
    }
    try {
      const auto r = manifest.stage(s.name, [&] {
        return transfer_experiment(mdps.at(s.target), {s.source, brts.at(s.source), brts.at(s.target), failure}, tasks,
                                   ctx.config.solver);
      });
      blocks.push_back(transfer_json(s.name, r));
      std::cout << "transfer " << s.name << ": " << s.source << " -> " << s.target << ", return " << r.mean_return_borrowed
                << " vs " << r.mean_return_own << " (gap " << r.relative_gap << ")\n";
    } catch (const InfeasibleError& e) {
      ++failed;
      blocks.push_back({{"scenario", s.name}, {"source", s.source}, {"target", s.target}, {"error", e.what()}});
      std::cout << "transfer " << s.name << ": infeasible\n";
    }
  }
  write_json(dir / "transfer.json", {{"scenarios", blocks}, {"brt_converged", converged}}, manifest);
  manifest.write(dir / "manifest.json");
  if (failed == static_cast<int>(scenarios.size())) return kExitInfeasible;
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Reachability-aware inverse constraint learning on Dubins grids", "reachkit"};
  app.set_version_flag("--version", kVersion);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads (default: REACHKIT_THREADS or 1)")->check(CLI::PositiveNumber);
  app.require_subcommand(1, 1);
  std::map<std::string, int (*)(const Context&)> commands = {{"brt", cmd_brt},
                                                             {"demos", cmd_demos},
                                                             {"icl", cmd_icl},
                                                             {"eval", cmd_eval},
                                                             {"transfer", cmd_transfer}};
  app.add_subcommand("brt", "solve the avoid BRT of the configured model");
  app.add_subcommand("demos", "generate expert policies, rollouts and the expert density");
  app.add_subcommand("icl", "run multi-task inverse constraint learning");
  app.add_subcommand("eval", "score the learned constraint against BRT and failure labels");
  app.add_subcommand("transfer", "constraint transfer across the preset triple");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (!out_dir.empty()) config.output.dir = out_dir;
    if (seed) config.seed = *seed;
    if (threads) set_thread_count(*threads);
    const Context ctx(std::move(config));
    fs::create_directories(ctx.out);
    const std::string name = app.get_subcommands().front()->get_name();
    return commands.at(name)(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace reachkit
