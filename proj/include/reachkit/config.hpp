#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reachkit/dynamics.hpp"
#include "reachkit/grid.hpp"
#include "reachkit/reachability.hpp"
#include "reachkit/tasks.hpp"

namespace reachkit {

struct GridSpec {
  std::array<double, 2> lo{-4.0, -4.0};
  std::array<double, 2> hi{4.0, 4.0};
  std::array<std::size_t, 3> counts{61, 61, 31};

  Grid3 build() const;
};

struct ModelSpec {
  std::string preset = "agile";  // empty for a custom model
  ControlAffineModel custom;

  ControlAffineModel build() const;
};

struct TaskSpec {
  int count = 20;
  double ring_radius = 3.0;
  double goal_radius = 0.3;
  double goal_jitter = 0.25;  // radians
  int rollouts_per_task = 10;
  std::string file;  // optional task list overriding the sampler
};

struct IclSpec {
  int epochs = 5;
  double epsilon = 1e-9;
  double threshold = 0.6;
  std::string expert = "exact";  // exact | demos
  std::string demos_file;        // external JSON-lines demonstrations
};

struct OutputSpec {
  std::string dir = "out";
  std::vector<double> slices{-1.5707963267948966, 0.0, 1.5707963267948966};
  double support_threshold = 1e-6;
};

struct EvalSpec {
  std::vector<std::uint64_t> seeds;  // extra seeds to rerun and aggregate
};

struct TransferSpec {
  std::vector<std::string> presets{"ultra_agile", "agile", "non_agile"};
};

struct RunConfig {
  std::uint64_t seed = 1;
  GridSpec grid;
  ModelSpec model;
  Obstacle obstacle;
  TaskSpec tasks;
  MdpParams mdp;
  IclSpec icl;
  SolverOptions solver;
  OutputSpec output;
  EvalSpec eval;
  TransferSpec transfer;
};

nlohmann::json to_json(const RunConfig& config);

// Parses and validates. Errors are ConfigError with the offending key path
// and, when `source` is the original text, its line number.
RunConfig config_from_json(const nlohmann::json& j, const std::string& source = {});
RunConfig load_config(const std::filesystem::path& path);

// Ring tasks for the configured seed, or the task file when one is given.
std::vector<Task> make_tasks(const RunConfig& config);

nlohmann::json task_to_json(const Task& t);
Task task_from_json(const nlohmann::json& j);
std::vector<Task> load_tasks(const std::filesystem::path& path);
void save_tasks(const std::filesystem::path& path, const std::vector<Task>& tasks);

nlohmann::json grid_to_json(const Grid3& g);

}  // namespace reachkit
