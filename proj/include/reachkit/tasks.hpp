#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reachkit/dynamics.hpp"
#include "reachkit/grid.hpp"
#include "reachkit/soft_mdp.hpp"

namespace reachkit {

struct Task {
  int id = 0;
  State start;
  Vec2 goal{};
  double goal_radius = 0.3;
};

enum class DisturbanceMode { none, iid_uniform };

// How a continuous successor state is mapped back onto the grid.
//   nearest:     snap to the nearest cell.
//   multilinear: split the mass over the enclosing cells with trilinear
//                weights, so sub-cell motion survives in expectation.
enum class TransitionScheme { nearest, multilinear };

struct MdpParams {
  double dt = 0.2;
  int horizon = 60;
  double tau = 0.05;
  double penalty = 500.0;
  double goal_bonus = 10.0;
  int action_samples = 3;  // per action dimension, endpoints included
  DisturbanceMode disturbance = DisturbanceMode::iid_uniform;
  TransitionScheme scheme = TransitionScheme::multilinear;
};

std::string to_string(DisturbanceMode m);
std::string to_string(TransitionScheme s);
DisturbanceMode disturbance_mode_from(const std::string& name);
TransitionScheme transition_scheme_from(const std::string& name);

// Dubins task MDP on a grid: cell-center Euler steps under a finite action
// set and a finite disturbance distribution.
class TabularMDP {
 public:
  TabularMDP(Grid3 grid, ControlAffineModel model, MdpParams params);

  const Grid3& grid() const { return grid_; }
  const ControlAffineModel& model() const { return model_; }
  const MdpParams& params() const { return params_; }
  const std::vector<Action>& actions() const { return actions_; }
  // Disturbance atoms with equal weight. `none` has the single atom (0, 0).
  const std::vector<Disturbance>& disturbances() const { return disturbances_; }
  const FiniteMdp& kernel() const { return kernel_; }

  // Successor distribution of one (cell, action, disturbance) triple.
  std::vector<Transition> successors(std::size_t cell, const Action& a, const Disturbance& d) const;

 private:
  Grid3 grid_;
  ControlAffineModel model_;
  MdpParams params_;
  std::vector<Action> actions_;
  std::vector<Disturbance> disturbances_;
  FiniteMdp kernel_;
};

// -dt * |(x, y) - goal| plus goal_bonus inside the goal disc. Independent of
// the action.
double reward(const TabularMDP& mdp, const Task& task, const State& s, const Action& a);

// Cells whose centers lie within the goal radius (all headings).
BoolMask goal_mask(const Grid3& grid, const Task& task);

struct SoftCviResult {
  PolicyTable policy;
  ScalarField value;
};

// Penalized soft value iteration for one task. Constraint and goal cells are
// absorbing; constraint cells pay `penalty` every step.
// Throws InfeasibleError when the start cell is itself constrained.
SoftCviResult soft_cvi(const TabularMDP& mdp, const Task& task, const BoolMask& constraint, double penalty,
                       double tau);
SoftCviResult soft_cvi(const TabularMDP& mdp, const Task& task, const BoolMask& constraint);

struct TrajectoryRecord {
  int task = 0;
  int step = 0;
  double t = 0.0;
  State state;
  Action action{};
};

// Samples one trajectory. Stops after `horizon` states or on reaching an
// absorbing cell (which is recorded). Deterministic in the seed.
std::vector<TrajectoryRecord> rollout(const TabularMDP& mdp, const PolicyTable& policy, const Task& task,
                                      std::uint64_t seed);

// Expected per-cell occupancy over the horizon; total mass equals horizon.
ScalarField visitation_exact(const TabularMDP& mdp, const PolicyTable& policy, const Task& task);

// Pointwise sum; throws ShapeError on grid mismatch.
ScalarField aggregate_density(const std::vector<ScalarField>& fields);

// Unpenalized expected task reward under the policy's exact occupancy.
double expected_return(const TabularMDP& mdp, const PolicyTable& policy, const Task& task);

// Mass of `density` on cells of `mask`.
double mass_in(const ScalarField& density, const BoolMask& mask);

// Empirical occupancy of logged trajectories, padding absorbed trajectories
// with their final cell up to the horizon.
ScalarField empirical_density(const Grid3& grid, const std::vector<TrajectoryRecord>& records, int horizon);

// K start/goal pairs on a ring around the origin. Starts are evenly spaced;
// each goal sits across the ring with a seeded angular offset, and the start
// heading faces the goal.
std::vector<Task> ring_tasks(int count, double ring_radius, double goal_radius, std::uint64_t seed,
                             double max_offset = 0.25);

}  // namespace reachkit
