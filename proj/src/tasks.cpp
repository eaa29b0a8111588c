#include "reachkit/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "reachkit/errors.hpp"
#include "reachkit/reachability.hpp"
#include "reachkit/rng.hpp"

namespace reachkit {

std::string to_string(DisturbanceMode m) { return m == DisturbanceMode::none ? "none" : "iid_uniform"; }

std::string to_string(TransitionScheme s) { return s == TransitionScheme::nearest ? "nearest" : "multilinear"; }

DisturbanceMode disturbance_mode_from(const std::string& name) {
  if (name == "none") return DisturbanceMode::none;
  if (name == "iid_uniform") return DisturbanceMode::iid_uniform;
  throw ConfigError("unknown disturbance_mode '" + name + "'");
}

TransitionScheme transition_scheme_from(const std::string& name) {
  if (name == "nearest") return TransitionScheme::nearest;
  if (name == "multilinear") return TransitionScheme::multilinear;
  throw ConfigError("unknown transition scheme '" + name + "'");
}

namespace {

std::vector<Transition> merge(std::vector<Transition> row) {
  std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.next < b.next; });
  std::vector<Transition> out;
  for (const auto& t : row) {
    if (t.prob == 0.0) continue;
    if (!out.empty() && out.back().next == t.next) {
      out.back().prob += t.prob;
    } else {
      out.push_back(t);
    }
  }
  return out;
}

FiniteMdp build_kernel(const TabularMDP& mdp) {
  const Grid3& g = mdp.grid();
  FiniteMdp kernel(g.size(), mdp.actions().size());
  const double w = 1.0 / static_cast<double>(mdp.disturbances().size());
  std::vector<Transition> row;
  for (std::size_t n = 0; n < g.size(); ++n) {
    for (const auto& a : mdp.actions()) {
      row.clear();
      for (const auto& d : mdp.disturbances()) {
        for (auto t : mdp.successors(n, a, d)) {
          t.prob *= w;
          row.push_back(t);
        }
      }
      const auto merged = merge(row);
      kernel.append(merged);
    }
  }
  return kernel;
}

std::vector<Action> action_set(const ControlAffineModel& model, int samples) {
  std::vector<Action> out;
  for (double v : box_samples(model.action.lo[0], model.action.hi[0], samples)) {
    for (double w : box_samples(model.action.lo[1], model.action.hi[1], samples)) out.push_back({v, w});
  }
  return out;
}

std::vector<Disturbance> disturbance_atoms(const ControlAffineModel& model, DisturbanceMode mode) {
  if (mode == DisturbanceMode::none) return {model.disturbance.midpoint()};
  const auto& b = model.disturbance;
  return {b.midpoint(), {b.lo[0], b.lo[1]}, {b.lo[0], b.hi[1]}, {b.hi[0], b.lo[1]}, {b.hi[0], b.hi[1]}};
}

std::size_t start_cell(const Grid3& grid, const Task& task) { return grid.flat(grid.nearest(task.start)); }

}  // namespace

TabularMDP::TabularMDP(Grid3 grid, ControlAffineModel model, MdpParams params)
    : grid_(std::move(grid)),
      model_(std::move(model)),
      params_(params),
      actions_(action_set(model_, params.action_samples)),
      disturbances_(disturbance_atoms(model_, params.disturbance)),
      kernel_(1, 1) {
  if (!(params_.dt > 0.0)) throw ConfigError("mdp.dt must be positive");
  if (params_.horizon < 1) throw ConfigError("mdp.horizon must be >= 1");
  if (!(params_.tau > 0.0)) throw ConfigError("mdp.tau must be positive");
  if (!(params_.penalty > 0.0)) throw ConfigError("mdp.penalty must be positive");
  kernel_ = build_kernel(*this);
}

std::vector<Transition> TabularMDP::successors(std::size_t cell, const Action& a, const Disturbance& d) const {
  const State s = grid_.state(cell);
  State next = euler_step(model_, s, a, d, params_.dt);
  next.x = std::clamp(next.x, grid_.axis(0).lo, grid_.axis(0).hi);
  next.y = std::clamp(next.y, grid_.axis(1).lo, grid_.axis(1).hi);
  if (params_.scheme == TransitionScheme::nearest) {
    return {{static_cast<std::uint32_t>(grid_.flat(grid_.nearest(next))), 1.0}};
  }

  std::array<std::size_t, 3> lo{}, hi{};
  std::array<double, 3> w{};
  const double coords[3] = {next.x, next.y, next.theta};
  for (std::size_t dim = 0; dim < 3; ++dim) {
    const auto& ax = grid_.axis(dim);
    const double u = (coords[dim] - ax.lo) / ax.spacing();
    const double f = std::floor(u);
    if (ax.periodic) {
      long long i0 = static_cast<long long>(f) % static_cast<long long>(ax.count);
      if (i0 < 0) i0 += static_cast<long long>(ax.count);
      lo[dim] = static_cast<std::size_t>(i0);
      hi[dim] = (lo[dim] + 1) % ax.count;
      w[dim] = u - f;
    } else {
      const double fc = std::clamp(f, 0.0, static_cast<double>(ax.count - 2));
      lo[dim] = static_cast<std::size_t>(fc);
      hi[dim] = lo[dim] + 1;
      w[dim] = std::clamp(u - fc, 0.0, 1.0);
    }
  }
  std::vector<Transition> out;
  for (int corner = 0; corner < 8; ++corner) {
    double weight = 1.0;
    CellIndex c{};
    for (std::size_t dim = 0; dim < 3; ++dim) {
      const bool up = (corner >> dim) & 1;
      c[dim] = up ? hi[dim] : lo[dim];
      weight *= up ? w[dim] : 1.0 - w[dim];
    }
    if (weight > 0.0) out.push_back({static_cast<std::uint32_t>(grid_.flat(c)), weight});
  }
  return merge(std::move(out));
}

double reward(const TabularMDP& mdp, const Task& task, const State& s, const Action& /*a*/) {
  const double dist = std::hypot(s.x - task.goal[0], s.y - task.goal[1]);
  double r = -mdp.params().dt * dist;
  if (dist <= task.goal_radius) r += mdp.params().goal_bonus;
  return r;
}

BoolMask goal_mask(const Grid3& grid, const Task& task) {
  BoolMask m(grid);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const State s = grid.state(n);
    m.set(n, std::hypot(s.x - task.goal[0], s.y - task.goal[1]) <= task.goal_radius);
  }
  return m;
}

namespace {

std::vector<double> reward_table(const TabularMDP& mdp, const Task& task) {
  const Grid3& g = mdp.grid();
  const std::size_t na = mdp.actions().size();
  std::vector<double> r(g.size() * na);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const State s = g.state(n);
    for (std::size_t a = 0; a < na; ++a) r[n * na + a] = reward(mdp, task, s, mdp.actions()[a]);
  }
  return r;
}

}  // namespace

SoftCviResult soft_cvi(const TabularMDP& mdp, const Task& task, const BoolMask& constraint, double penalty,
                       double tau) {
  require_same_grid(mdp.grid(), constraint.grid(), "soft_cvi");
  if (!(penalty > 0.0)) throw ConfigError("penalty must be positive");
  if (!(tau > 0.0)) throw ConfigError("temperature must be positive");
  const Grid3& g = mdp.grid();
  if (constraint[start_cell(g, task)]) {
    throw InfeasibleError("task " + std::to_string(task.id) + ": start cell lies inside the constraint set");
  }
  const std::size_t na = mdp.actions().size();
  auto r = reward_table(mdp, task);
  const BoolMask goal = goal_mask(g, task);
  std::vector<std::uint8_t> absorbing(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    absorbing[n] = (goal[n] || constraint[n]) ? 1 : 0;
    if (constraint[n]) {
      for (std::size_t a = 0; a < na; ++a) r[n * na + a] -= penalty;
    }
  }
  auto sol = soft_value_iteration(mdp.kernel(), r, absorbing, mdp.params().horizon, tau);
  return {std::move(sol.policy), ScalarField(g, std::move(sol.value))};
}

SoftCviResult soft_cvi(const TabularMDP& mdp, const Task& task, const BoolMask& constraint) {
  return soft_cvi(mdp, task, constraint, mdp.params().penalty, mdp.params().tau);
}

std::vector<TrajectoryRecord> rollout(const TabularMDP& mdp, const PolicyTable& policy, const Task& task,
                                      std::uint64_t seed) {
  const Grid3& g = mdp.grid();
  if (!g.contains_xy(task.start.x, task.start.y)) throw DomainError("task start outside the grid");
  Rng rng(seed);
  std::vector<TrajectoryRecord> out;
  std::size_t cell = start_cell(g, task);
  const std::vector<double> atom_weights(mdp.disturbances().size(), 1.0);
  std::vector<double> probs;
  for (int step = 0; step < mdp.params().horizon; ++step) {
    const std::size_t a = rng.categorical(policy.row(cell));
    out.push_back({task.id, step, step * mdp.params().dt, g.state(cell), mdp.actions()[a]});
    if (!policy.absorbing.empty() && policy.absorbing[cell]) break;
    const std::size_t d = rng.categorical(atom_weights);
    const auto next = mdp.successors(cell, mdp.actions()[a], mdp.disturbances()[d]);
    if (next.size() == 1) {
      cell = next.front().next;
    } else {
      probs.clear();
      for (const auto& t : next) probs.push_back(t.prob);
      cell = next[rng.categorical(probs)].next;
    }
  }
  return out;
}

ScalarField visitation_exact(const TabularMDP& mdp, const PolicyTable& policy, const Task& task) {
  const Grid3& g = mdp.grid();
  std::vector<double> start(g.size(), 0.0);
  start[start_cell(g, task)] = 1.0;
  return ScalarField(g, forward_visitation(mdp.kernel(), policy, start, mdp.params().horizon));
}

ScalarField aggregate_density(const std::vector<ScalarField>& fields) {
  if (fields.empty()) throw ShapeError("aggregate_density needs at least one field");
  ScalarField out(fields.front().grid());
  for (const auto& f : fields) {
    require_same_grid(out.grid(), f.grid(), "aggregate_density");
    for (std::size_t n = 0; n < f.size(); ++n) out[n] += f[n];
  }
  return out;
}

double expected_return(const TabularMDP& mdp, const PolicyTable& policy, const Task& task) {
  const auto occupancy = visitation_exact(mdp, policy, task);
  return occupancy_reward(policy, occupancy.values(), reward_table(mdp, task));
}

double mass_in(const ScalarField& density, const BoolMask& mask) {
  require_same_grid(density.grid(), mask.grid(), "mass_in");
  double m = 0.0;
  for (std::size_t n = 0; n < density.size(); ++n) {
    if (mask[n]) m += density[n];
  }
  return m;
}

ScalarField empirical_density(const Grid3& grid, const std::vector<TrajectoryRecord>& records, int horizon) {
  ScalarField out(grid);
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    while (j + 1 < records.size() && records[j + 1].task == records[i].task && records[j + 1].step == records[j].step + 1) {
      ++j;
    }
    for (std::size_t r = i; r <= j; ++r) out[grid.flat(grid.nearest(records[r].state))] += 1.0;
    const int logged = static_cast<int>(j - i + 1);
    if (logged < horizon) {
      out[grid.flat(grid.nearest(records[j].state))] += static_cast<double>(horizon - logged);
    }
    i = j + 1;
  }
  return out;
}

std::vector<Task> ring_tasks(int count, double ring_radius, double goal_radius, std::uint64_t seed,
                             double max_offset) {
  if (count < 1) throw ConfigError("task count must be >= 1");
  std::vector<Task> tasks;
  for (int k = 0; k < count; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    const double phi = 2.0 * std::numbers::pi * k / count;
    const double offset = max_offset * (2.0 * rng.uniform() - 1.0);
    const double psi = phi + std::numbers::pi + offset;
    Task t;
    t.id = k;
    t.start = {ring_radius * std::cos(phi), ring_radius * std::sin(phi), 0.0};
    t.goal = {ring_radius * std::cos(psi), ring_radius * std::sin(psi)};
    t.start.theta = wrap_angle(std::atan2(t.goal[1] - t.start.y, t.goal[0] - t.start.x));
    t.goal_radius = goal_radius;
    tasks.push_back(t);
  }
  return tasks;
}

}  // namespace reachkit
