#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "reachkit/errors.hpp"
#include "reachkit/reachability.hpp"
#include "reachkit/tasks.hpp"

using namespace reachkit;

namespace {

// Three-state chain, actions left/right. Deterministic moves clamp at the ends.
FiniteMdp chain() {
  FiniteMdp m(3, 2);
  for (std::uint32_t s = 0; s < 3; ++s) {
    const Transition left{s == 0 ? 0u : s - 1, 1.0};
    const Transition right{s == 2 ? 2u : s + 1, 1.0};
    m.append(std::span(&left, 1));
    m.append(std::span(&right, 1));
  }
  return m;
}

// Same chain, but each move slips in place with probability 0.3.
FiniteMdp slippery_chain() {
  FiniteMdp m(3, 2);
  for (std::uint32_t s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) {
      const std::uint32_t target = a == 0 ? (s == 0 ? 0u : s - 1) : (s == 2 ? 2u : s + 1);
      if (target == s) {
        const Transition stay{s, 1.0};
        m.append(std::span(&stay, 1));
      } else {
        const Transition row[2] = {{std::min(s, target), s < target ? 0.3 : 0.7},
                                   {std::max(s, target), s < target ? 0.7 : 0.3}};
        m.append(row);
      }
    }
  }
  return m;
}

const std::vector<double> kReward = {0.1, -0.4, 0.3, 0.2, -0.2, 0.5};

const Grid3& grid11() {
  static const Grid3 g = Grid3::square(11, 11, 7);
  return g;
}

const TabularMDP& small_mdp() {
  static const TabularMDP mdp(grid11(), preset(Preset::agile), MdpParams{});
  return mdp;
}

Task small_task() {
  Task t;
  t.id = 7;
  t.start = {-3.0, 0.0, 0.0};
  t.goal = {3.0, 0.4};
  t.goal_radius = 0.5;
  return t;
}

}  // namespace

TEST_CASE("soft value iteration matches path enumeration on a deterministic chain") {
  const double tau = 0.5;
  const int horizon = 5;
  const auto mdp = chain();
  const auto sol = soft_value_iteration(mdp, kReward, {}, horizon, tau);
  // Deterministic soft values: tau log sum over action sequences of exp(return / tau).
  for (std::size_t s0 = 0; s0 < 3; ++s0) {
    double z = 0.0;
    for (int seq = 0; seq < (1 << horizon); ++seq) {
      std::size_t s = s0;
      double ret = 0.0;
      for (int t = 0; t < horizon; ++t) {
        const int a = (seq >> t) & 1;
        ret += kReward[s * 2 + a];
        s = mdp.outcomes(s, a)[0].next;
      }
      z += std::exp(ret / tau);
    }
    CHECK(std::abs(sol.value[s0] - tau * std::log(z)) <= 1e-9);
  }
}

TEST_CASE("soft value iteration matches a direct recursion on a stochastic chain") {
  const double tau = 0.3;
  const int horizon = 4;
  const auto mdp = slippery_chain();
  const std::vector<std::uint8_t> absorbing = {0, 0, 1};
  std::function<double(int, std::size_t)> v = [&](int h, std::size_t s) -> double {
    if (h == horizon) return 0.0;
    double z = 0.0;
    for (std::size_t a = 0; a < 2; ++a) {
      double q = kReward[s * 2 + a];
      if (absorbing[s]) {
        q += v(h + 1, s);
      } else {
        for (const auto& t : mdp.outcomes(s, a)) q += t.prob * v(h + 1, t.next);
      }
      z += std::exp(q / tau);
    }
    return tau * std::log(z);
  };
  const auto sol = soft_value_iteration(mdp, kReward, absorbing, horizon, tau);
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(std::abs(sol.value[s] - v(0, s)) <= 1e-9);
    double row = 0.0;
    for (std::size_t a = 0; a < 2; ++a) row += sol.policy(s, a);
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(soft_value_iteration(mdp, kReward, absorbing, 0, tau), ConfigError);
  CHECK_THROWS_AS(soft_value_iteration(mdp, kReward, absorbing, 3, 0.0), ConfigError);
  CHECK_THROWS_AS(soft_value_iteration(mdp, std::vector<double>(4), absorbing, 3, tau), ShapeError);
}

TEST_CASE("forward visitation matches trajectory enumeration") {
  const auto mdp = slippery_chain();
  const std::vector<std::uint8_t> absorbing = {0, 0, 1};
  const auto sol = soft_value_iteration(mdp, kReward, absorbing, 4, 0.7);
  const std::vector<double> start = {0.6, 0.4, 0.0};
  const int horizon = 5;
  std::vector<double> oracle(3, 0.0);
  std::function<void(std::size_t, double, int)> walk = [&](std::size_t s, double p, int t) {
    oracle[s] += p;
    if (t + 1 == horizon) return;
    if (absorbing[s]) return walk(s, p, t + 1);
    for (std::size_t a = 0; a < 2; ++a) {
      for (const auto& tr : mdp.outcomes(s, a)) walk(tr.next, p * sol.policy(s, a) * tr.prob, t + 1);
    }
  };
  for (std::size_t s = 0; s < 3; ++s) walk(s, start[s], 0);
  const auto rho = forward_visitation(mdp, sol.policy, start, horizon);
  double total = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(std::abs(rho[s] - oracle[s]) <= 1e-12);
    total += rho[s];
  }
  CHECK(total == doctest::Approx(horizon));
}

TEST_CASE("grid MDP kernel") {
  const auto& mdp = small_mdp();
  CHECK(mdp.actions().size() == 9);
  CHECK(mdp.disturbances().size() == 5);
  const auto& k = mdp.kernel();
  CHECK(k.complete());
  for (std::size_t s = 0; s < k.n_states(); s += 37) {
    for (std::size_t a = 0; a < k.n_actions(); ++a) {
      double sum = 0.0;
      for (const auto& t : k.outcomes(s, a)) {
        CHECK(t.prob > 0.0);
        sum += t.prob;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("multilinear successors keep the Euler target in expectation") {
    const std::size_t cell = grid11().flat(5, 5, 3);
    const Action a{0.3, 0.7};
    const Disturbance d{0.1, -0.2};
    const State target = euler_step(mdp.model(), grid11().state(cell), a, d, mdp.params().dt);
    double ex = 0.0, ey = 0.0;
    for (const auto& t : mdp.successors(cell, a, d)) {
      const State s = grid11().state(t.next);
      ex += t.prob * s.x;
      ey += t.prob * s.y;
    }
    CHECK(ex == doctest::Approx(target.x).epsilon(1e-12));
    CHECK(ey == doctest::Approx(target.y).epsilon(1e-12));
  }

  SUBCASE("nearest scheme is deterministic") {
    MdpParams p;
    p.scheme = TransitionScheme::nearest;
    p.disturbance = DisturbanceMode::none;
    const TabularMDP nearest(grid11(), preset(Preset::agile), p);
    CHECK(nearest.disturbances().size() == 1);
    for (std::size_t a = 0; a < nearest.actions().size(); ++a) CHECK(nearest.kernel().outcomes(100, a).size() == 1);
  }

  SUBCASE("parameter validation") {
    MdpParams p;
    p.horizon = 0;
    CHECK_THROWS_AS(TabularMDP(grid11(), preset(Preset::agile), p), ConfigError);
    p = {};
    p.tau = 0.0;
    CHECK_THROWS_AS(TabularMDP(grid11(), preset(Preset::agile), p), ConfigError);
  }
}

TEST_CASE("reward and goal mask") {
  const auto& mdp = small_mdp();
  const Task t = small_task();
  CHECK(reward(mdp, t, {0.0, 0.4, 1.0}, {}) == doctest::Approx(-0.2 * 3.0));
  CHECK(reward(mdp, t, {3.0, 0.4, 0.0}, {}) == doctest::Approx(10.0));
  const BoolMask goal = goal_mask(grid11(), t);
  // Centers (3.2, 0) and (3.2, 0.8) lie 0.447 from the goal; every heading counts.
  CHECK(goal.count() == 14);
  CHECK(goal[grid11().flat(9, 5, 2)]);
  CHECK(goal[grid11().flat(9, 6, 6)]);
  CHECK_FALSE(goal[grid11().flat(10, 5, 2)]);
}

TEST_CASE("soft_cvi respects the constraint") {
  const auto& mdp = small_mdp();
  const Task t = small_task();
  const BoolMask failure = failure_mask({}, grid11());
  const auto free = soft_cvi(mdp, t, BoolMask(grid11()));
  const auto safe = soft_cvi(mdp, t, failure);
  const auto rho_free = visitation_exact(mdp, free.policy, t);
  const auto rho_safe = visitation_exact(mdp, safe.policy, t);
  CHECK(rho_free.sum() == doctest::Approx(mdp.params().horizon));
  CHECK(rho_safe.sum() == doctest::Approx(mdp.params().horizon));
  CHECK(mass_in(rho_safe, failure) < mass_in(rho_free, failure));

  // Harsher penalties never push more mass into the constraint.
  double previous = mass_in(rho_free, failure);
  for (double penalty : {1.0, 10.0, 100.0, 1000.0}) {
    const auto sol = soft_cvi(mdp, t, failure, penalty, mdp.params().tau);
    const double m = mass_in(visitation_exact(mdp, sol.policy, t), failure);
    CHECK(m <= previous + 1e-9);
    previous = m;
  }
  CHECK(expected_return(mdp, free.policy, t) >= expected_return(mdp, safe.policy, t) - 1e-9);

  BoolMask blocked(grid11());
  blocked.set(grid11().flat(grid11().nearest(t.start)));
  CHECK_THROWS_AS(soft_cvi(mdp, t, blocked), InfeasibleError);
  CHECK_THROWS_AS(soft_cvi(mdp, t, failure, 0.0, 0.05), ConfigError);
}

TEST_CASE("Monte Carlo rollouts reproduce the exact visitation") {
  const auto& mdp = small_mdp();
  const Task t = small_task();
  const auto sol = soft_cvi(mdp, t, failure_mask({}, grid11()));
  const auto exact = visitation_exact(mdp, sol.policy, t);
  std::vector<TrajectoryRecord> records;
  const int n = 50000;
  for (int r = 0; r < n; ++r) {
    auto traj = rollout(mdp, sol.policy, t, 1000 + r);
    records.insert(records.end(), traj.begin(), traj.end());
  }
  const auto empirical = empirical_density(grid11(), records, mdp.params().horizon);
  CHECK(empirical.sum() == doctest::Approx(static_cast<double>(n) * mdp.params().horizon));
  double tv = 0.0;
  for (std::size_t c = 0; c < exact.size(); ++c) tv += std::abs(exact[c] / exact.sum() - empirical[c] / empirical.sum());
  CHECK(0.5 * tv <= 0.02);
}

TEST_CASE("rollouts are deterministic in the seed") {
  const auto& mdp = small_mdp();
  const Task t = small_task();
  const auto sol = soft_cvi(mdp, t, BoolMask(grid11()));
  const auto a = rollout(mdp, sol.policy, t, 42);
  const auto b = rollout(mdp, sol.policy, t, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].state.x == b[i].state.x);
    CHECK(a[i].state.theta == b[i].state.theta);
    CHECK(a[i].action == b[i].action);
    CHECK(a[i].step == static_cast<int>(i));
    CHECK(a[i].task == 7);
  }
  bool differs = false;
  for (std::uint64_t seed = 43; seed < 53 && !differs; ++seed) {
    const auto c = rollout(mdp, sol.policy, t, seed);
    differs = c.size() != a.size();
    for (std::size_t i = 0; !differs && i < c.size(); ++i) differs = c[i].action != a[i].action;
  }
  CHECK(differs);
  Task outside = t;
  outside.start.x = 9.0;
  CHECK_THROWS_AS(rollout(mdp, sol.policy, outside, 1), DomainError);
}

TEST_CASE("empirical density pads absorbed trajectories") {
  const Grid3& g = grid11();
  std::vector<TrajectoryRecord> recs;
  for (int s = 0; s < 3; ++s) recs.push_back({0, s, 0.2 * s, g.state(g.flat(s, 0, 0)), {}});
  for (int s = 0; s < 2; ++s) recs.push_back({1, s, 0.2 * s, g.state(g.flat(4, 4, 4)), {}});
  const auto d = empirical_density(g, recs, 5);
  CHECK(d.sum() == doctest::Approx(10.0));
  CHECK(d[g.flat(2, 0, 0)] == doctest::Approx(3.0));
  CHECK(d[g.flat(4, 4, 4)] == doctest::Approx(5.0));
}

TEST_CASE("aggregate_density") {
  const ScalarField a(grid11(), 1.0), b(grid11(), 2.0);
  CHECK(aggregate_density({a, b}).sum() == doctest::Approx(3.0 * grid11().size()));
  CHECK_THROWS_AS(aggregate_density({a, ScalarField(Grid3::square(5, 5, 3))}), ShapeError);
  CHECK_THROWS_AS(aggregate_density({}), ShapeError);
}

TEST_CASE("ring tasks") {
  const auto tasks = ring_tasks(8, 3.0, 0.3, 11);
  REQUIRE(tasks.size() == 8);
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto& t = tasks[k];
    CHECK(t.id == static_cast<int>(k));
    CHECK(std::hypot(t.start.x, t.start.y) == doctest::Approx(3.0));
    CHECK(std::hypot(t.goal[0], t.goal[1]) == doctest::Approx(3.0));
    const double phi = std::atan2(t.start.y, t.start.x);
    const double psi = std::atan2(t.goal[1], t.goal[0]);
    CHECK(std::abs(wrap_angle(psi - phi - std::numbers::pi)) <= 0.25 + 1e-12);
    const double heading = std::atan2(t.goal[1] - t.start.y, t.goal[0] - t.start.x);
    CHECK(std::abs(wrap_angle(heading - t.start.theta)) <= 1e-12);
  }
  const auto again = ring_tasks(8, 3.0, 0.3, 11);
  const auto other = ring_tasks(8, 3.0, 0.3, 12);
  CHECK(again[3].goal == tasks[3].goal);
  CHECK(other[3].goal != tasks[3].goal);
  const auto straight = ring_tasks(4, 3.0, 0.3, 11, 0.0);
  CHECK(straight[1].goal[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(straight[1].goal[1] == doctest::Approx(-3.0));
  CHECK_THROWS_AS(ring_tasks(0, 3.0, 0.3, 1), ConfigError);
}
