#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace reachkit {

struct Transition {
  std::uint32_t next = 0;
  double prob = 0.0;
};

// Finite MDP kernel in compressed rows, one row per (state, action) pair.
class FiniteMdp {
 public:
  FiniteMdp(std::size_t n_states, std::size_t n_actions);

  // Rows must be appended in (state, action) order, action fastest.
  void append(std::span<const Transition> row);
  bool complete() const { return offsets_.size() == n_states_ * n_actions_ + 1; }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::span<const Transition> outcomes(std::size_t s, std::size_t a) const {
    const std::size_t r = s * n_actions_ + a;
    return {entries_.data() + offsets_[r], entries_.data() + offsets_[r + 1]};
  }

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<std::size_t> offsets_;
  std::vector<Transition> entries_;
};

// Stationary stochastic policy, row-major (state, action).
struct PolicyTable {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> prob;
  // States the policy was solved with as absorbing; rollouts and visitation
  // keep mass there.
  std::vector<std::uint8_t> absorbing;

  double operator()(std::size_t s, std::size_t a) const { return prob[s * n_actions + a]; }
  std::span<const double> row(std::size_t s) const { return {prob.data() + s * n_actions, n_actions}; }
};

struct SoftSolution {
  PolicyTable policy;        // first-stage table pi_0
  std::vector<double> value;  // V_0
};

// Finite-horizon soft Bellman recursion
//   Q_h(s, a) = r(s, a) + E[V_{h+1}(s')],  V_h(s) = tau log sum_a exp(Q_h(s, a) / tau)
// with V_H = 0. Absorbing states transition to themselves under every action.
SoftSolution soft_value_iteration(const FiniteMdp& mdp, std::span<const double> reward,
                                  std::span<const std::uint8_t> absorbing, int horizon, double tau);

// Expected state occupancy summed over steps 0..horizon-1 under a stationary
// policy, starting from `start` (a distribution over states).
std::vector<double> forward_visitation(const FiniteMdp& mdp, const PolicyTable& policy,
                                       std::span<const double> start, int horizon);

// sum_s rho(s) sum_a pi(a|s) r(s, a).
double occupancy_reward(const PolicyTable& policy, std::span<const double> occupancy, std::span<const double> reward);

}  // namespace reachkit
