#include "reachkit/soft_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reachkit/errors.hpp"
#include "reachkit/parallel.hpp"

namespace reachkit {

FiniteMdp::FiniteMdp(std::size_t n_states, std::size_t n_actions)
    : n_states_(n_states), n_actions_(n_actions), offsets_{0} {
  if (n_states == 0 || n_actions == 0) throw ConfigError("MDP needs at least one state and one action");
  offsets_.reserve(n_states * n_actions + 1);
}

void FiniteMdp::append(std::span<const Transition> row) {
  if (complete()) throw ConfigError("MDP kernel already has every (state, action) row");
  double mass = 0.0;
  for (const auto& t : row) {
    if (t.next >= n_states_) throw IndexError("transition target out of range");
    mass += t.prob;
  }
  if (std::abs(mass - 1.0) > 1e-9) throw ConfigError("transition row does not sum to one");
  entries_.insert(entries_.end(), row.begin(), row.end());
  offsets_.push_back(entries_.size());
}

SoftSolution soft_value_iteration(const FiniteMdp& mdp, std::span<const double> reward,
                                  std::span<const std::uint8_t> absorbing, int horizon, double tau) {
  if (!mdp.complete()) throw ConfigError("MDP kernel is incomplete");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(tau > 0.0)) throw ConfigError("temperature must be positive");
  const std::size_t ns = mdp.n_states(), na = mdp.n_actions();
  if (reward.size() != ns * na) throw ShapeError("reward table size mismatch");
  if (!absorbing.empty() && absorbing.size() != ns) throw ShapeError("absorbing flags size mismatch");

  std::vector<double> next_value(ns, 0.0);
  std::vector<double> value(ns, 0.0);
  PolicyTable policy{ns, na, std::vector<double>(ns * na), std::vector<std::uint8_t>(ns, 0)};
  if (!absorbing.empty()) policy.absorbing.assign(absorbing.begin(), absorbing.end());

  for (int h = horizon - 1; h >= 0; --h) {
    const bool first_stage = h == 0;
    parallel_for(ns, [&](std::size_t begin, std::size_t end) {
      std::vector<double> q(na);
      for (std::size_t s = begin; s < end; ++s) {
        const bool stuck = policy.absorbing[s] != 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < na; ++a) {
          double cont = 0.0;
          if (stuck) {
            cont = next_value[s];
          } else {
            for (const auto& t : mdp.outcomes(s, a)) cont += t.prob * next_value[t.next];
          }
          q[a] = reward[s * na + a] + cont;
          best = std::max(best, q[a]);
        }
        double z = 0.0;
        for (std::size_t a = 0; a < na; ++a) z += std::exp((q[a] - best) / tau);
        const double v = best + tau * std::log(z);
        value[s] = v;
        if (first_stage) {
          for (std::size_t a = 0; a < na; ++a) policy.prob[s * na + a] = std::exp((q[a] - v) / tau);
        }
      }
    });
    std::swap(value, next_value);
  }
  // After the final swap the stage-0 values sit in next_value.
  return {std::move(policy), std::move(next_value)};
}

std::vector<double> forward_visitation(const FiniteMdp& mdp, const PolicyTable& policy,
                                       std::span<const double> start, int horizon) {
  const std::size_t ns = mdp.n_states(), na = mdp.n_actions();
  if (start.size() != ns || policy.n_states != ns || policy.n_actions != na) {
    throw ShapeError("visitation inputs disagree on the state/action space");
  }
  std::vector<double> current(start.begin(), start.end());
  std::vector<double> next(ns);
  std::vector<double> total(ns, 0.0);
  for (int t = 0; t < horizon; ++t) {
    for (std::size_t s = 0; s < ns; ++s) total[s] += current[s];
    if (t + 1 == horizon) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
      const double m = current[s];
      if (m == 0.0) continue;
      if (!policy.absorbing.empty() && policy.absorbing[s]) {
        next[s] += m;
        continue;
      }
      for (std::size_t a = 0; a < na; ++a) {
        const double ma = m * policy(s, a);
        if (ma == 0.0) continue;
        for (const auto& tr : mdp.outcomes(s, a)) next[tr.next] += ma * tr.prob;
      }
    }
    std::swap(current, next);
  }
  return total;
}

double occupancy_reward(const PolicyTable& policy, std::span<const double> occupancy, std::span<const double> reward) {
  double acc = 0.0;
  for (std::size_t s = 0; s < policy.n_states; ++s) {
    if (occupancy[s] == 0.0) continue;
    double r = 0.0;
    for (std::size_t a = 0; a < policy.n_actions; ++a) r += policy(s, a) * reward[s * policy.n_actions + a];
    acc += occupancy[s] * r;
  }
  return acc;
}

}  // namespace reachkit
