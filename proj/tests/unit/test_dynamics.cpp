#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "reachkit/dynamics.hpp"
#include "reachkit/errors.hpp"

using namespace reachkit;
using std::numbers::pi;

namespace {

// Max over a dense action sample, min over a dense disturbance sample.
double sampled_hamiltonian(const ControlAffineModel& m, const State& s, const Vec3& p, int n) {
  const auto grid_of = [n](double lo, double hi) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    return out;
  };
  const auto av = grid_of(m.action.lo[0], m.action.hi[0]);
  const auto aw = grid_of(m.action.lo[1], m.action.hi[1]);
  const auto dx = grid_of(m.disturbance.lo[0], m.disturbance.hi[0]);
  const auto dy = grid_of(m.disturbance.lo[1], m.disturbance.hi[1]);
  double best = -1e300;
  for (double v : av) {
    for (double w : aw) {
      double worst = 1e300;
      for (double a : dx) {
        for (double b : dy) {
          const Vec3 f = flow(m, s, {v, w}, {a, b});
          worst = std::min(worst, p[0] * f[0] + p[1] * f[1] + p[2] * f[2]);
        }
      }
      best = std::max(best, worst);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("presets") {
  const auto agile = preset(Preset::agile);
  CHECK(agile.v_nominal == 0.6);
  CHECK(agile.action.hi == Vec2{1.5, 1.5});
  CHECK(agile.disturbance.lo == Vec2{-0.6, -0.6});
  CHECK(preset("non_agile").action.lo == Vec2{-0.7, -0.7});
  CHECK(preset("ultra_agile").action.hi == Vec2{5.0, 5.0});
  CHECK_THROWS_AS(preset("sluggish"), ConfigError);
}

TEST_CASE("flow") {
  const auto m = preset(Preset::agile);
  auto f = flow(m, {0, 0, 0}, {0, 0}, {0, 0});
  CHECK(f[0] == doctest::Approx(0.6));
  CHECK(f[1] == 0.0);
  CHECK(f[2] == 0.0);

  f = flow(m, {0, 0, pi / 2}, {0.4, 0}, {0, 0});
  CHECK(std::abs(f[0]) < 1e-12);
  CHECK(f[1] == doctest::Approx(1.0));

  f = flow(m, {0, 0, 0}, {0, 1.5}, {0.6, -0.6});
  CHECK(f[0] == doctest::Approx(1.2));
  CHECK(f[1] == doctest::Approx(-0.6));
  CHECK(f[2] == doctest::Approx(1.5));

  CHECK_THROWS_AS(flow(m, {0, 0, 0}, {1.6, 0}, {0, 0}), DomainError);
  CHECK_THROWS_AS(flow(m, {0, 0, 0}, {0, 0}, {0, 0.7}), DomainError);
}

TEST_CASE("flow is affine in the action") {
  const auto m = preset(Preset::agile);
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-0.7, 0.7), th(-pi, pi);
  for (int i = 0; i < 50; ++i) {
    const State s{0.0, 0.0, th(gen)};
    const Action a1{u(gen), u(gen)}, a2{u(gen), u(gen)};
    const Disturbance d{u(gen) * 0.5, u(gen) * 0.5};
    const auto f12 = flow(m, s, {a1[0] + a2[0], a1[1] + a2[1]}, d);
    const auto f1 = flow(m, s, a1, d);
    const auto g0 = m.control_column(s, 0), g1 = m.control_column(s, 1);
    for (int k = 0; k < 3; ++k) CHECK(f12[k] - f1[k] == doctest::Approx(g0[k] * a2[0] + g1[k] * a2[1]));
  }
}

TEST_CASE("hamiltonian closed form") {
  const auto agile = preset(Preset::agile);
  auto h = hamiltonian(agile, {0, 0, 0}, {1, 0, 0});
  CHECK(h.value == doctest::Approx(1.5));
  CHECK(h.a_star[0] == 1.5);
  CHECK(h.d_star == Disturbance{-0.6, 0.0});

  CHECK(hamiltonian(preset(Preset::non_agile), {0, 0, 0}, {1, 0, 0}).value == doctest::Approx(0.7));

  const auto zero = hamiltonian(agile, {0.3, -1.0, 2.0}, {0, 0, 0});
  CHECK(zero.value == 0.0);
  CHECK(zero.a_star == Action{0.0, 0.0});
  CHECK(zero.d_star == Disturbance{0.0, 0.0});
}

TEST_CASE("hamiltonian matches a 41x41 brute-force max-min") {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0), th(-pi, pi);
  for (const auto name : preset_names()) {
    const auto m = preset(name);
    for (int i = 0; i < 12; ++i) {
      const State s{u(gen), u(gen), th(gen)};
      const Vec3 p{u(gen), u(gen), u(gen)};
      CHECK(hamiltonian(m, s, p).value == doctest::Approx(sampled_hamiltonian(m, s, p, 41)).epsilon(1e-9));
    }
  }
  // Corner cases the random probes rarely hit.
  const auto m = preset(Preset::agile);
  for (const Vec3 p : {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, -1}, Vec3{-1, 1, 0.5}}) {
    CHECK(hamiltonian(m, {0, 0, 0}, p).value == doctest::Approx(sampled_hamiltonian(m, {0, 0, 0}, p, 41)).epsilon(1e-9));
  }
}

TEST_CASE("hamiltonian properties") {
  std::mt19937 gen(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0), th(-pi, pi), scale(0.1, 5.0);
  auto driftless = preset(Preset::agile);
  driftless.v_nominal = 0.0;
  const auto agile = preset(Preset::agile);
  const auto non_agile = preset(Preset::non_agile);
  for (int i = 0; i < 200; ++i) {
    const State s{u(gen), u(gen), th(gen)};
    const Vec3 p{u(gen), u(gen), u(gen)};
    const double l = scale(gen);
    const Vec3 lp{l * p[0], l * p[1], l * p[2]};
    CHECK(hamiltonian(driftless, s, lp).value == doctest::Approx(l * hamiltonian(driftless, s, p).value));
    CHECK(hamiltonian(agile, s, p).value >= hamiltonian(non_agile, s, p).value - 1e-12);
  }
}

TEST_CASE("dissipation bounds") {
  auto a = dissipation_bounds(preset(Preset::agile), {0, 0, 0});
  CHECK(a[0] == doctest::Approx(2.7));
  CHECK(a[1] == doctest::Approx(0.6));
  CHECK(a[2] == doctest::Approx(1.5));
  a = dissipation_bounds(preset(Preset::non_agile), {0, 0, pi / 2});
  CHECK(a[0] == doctest::Approx(0.6));
  CHECK(a[1] == doctest::Approx(1.9));
  CHECK(a[2] == doctest::Approx(0.7));
}

TEST_CASE("dissipation bounds dominate finite-difference dH/dp") {
  std::mt19937 gen(29);
  std::uniform_real_distribution<double> u(-2.0, 2.0), th(-pi, pi);
  for (const auto name : preset_names()) {
    const auto m = preset(name);
    for (int i = 0; i < 100; ++i) {
      const State s{u(gen), u(gen), th(gen)};
      const Vec3 p{u(gen), u(gen), u(gen)};
      const Vec3 alpha = dissipation_bounds(m, s);
      for (int k = 0; k < 3; ++k) {
        CHECK(alpha[k] >= 0.0);
        Vec3 q = p;
        const double eps = 1e-6;
        q[k] += eps;
        const double slope = (hamiltonian(m, s, q).value - hamiltonian(m, s, p).value) / eps;
        CHECK(std::abs(slope) <= alpha[k] + 1e-6);
      }
    }
  }
}

TEST_CASE("euler_step") {
  const auto m = preset(Preset::agile);
  auto s = euler_step(m, {0, 0, 0}, {0, 0}, {0, 0}, 0.1);
  CHECK(s.x == doctest::Approx(0.06));
  CHECK(s.y == 0.0);

  s = euler_step(m, {0, 0, 3.1}, {0, 1.5}, {0, 0}, 0.1);
  CHECK(s.theta == doctest::Approx(3.25 - 2.0 * pi));

  State r{0, 0, 0};
  for (int i = 0; i < 10; ++i) r = euler_step(m, r, {0, 0}, {0, 0}, 0.1);
  CHECK(r.x == doctest::Approx(0.6));
  CHECK(r.y == 0.0);

  CHECK_THROWS_AS(euler_step(m, {0, 0, 0}, {0, 0}, {0, 0}, 0.0), DomainError);
  CHECK_THROWS_AS(euler_step(m, {0, 0, 0}, {2.0, 0}, {0, 0}, 0.1), DomainError);
}
