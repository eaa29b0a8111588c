#include <doctest.h>

#include <cmath>

#include "reachkit/errors.hpp"
#include "reachkit/reachability.hpp"

using namespace reachkit;

namespace {

const Grid3& grid21() {
  static const Grid3 g = Grid3::square(21, 21, 11);
  return g;
}

double agreement(const BoolMask& a, const BoolMask& b) {
  std::size_t same = 0;
  for (std::size_t n = 0; n < a.size(); ++n) same += a[n] == b[n];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

std::size_t difference(const BoolMask& a, const BoolMask& b) { return a.size() - static_cast<std::size_t>(agreement(a, b) * a.size() + 0.5); }

const BRTResult& solved(Preset p) {
  static const BRTResult agile = solve_brt(preset(Preset::agile), failure_sdf({}, grid21()));
  static const BRTResult non_agile = solve_brt(preset(Preset::non_agile), failure_sdf({}, grid21()));
  static const BRTResult ultra = solve_brt(preset(Preset::ultra_agile), failure_sdf({}, grid21()));
  return p == Preset::agile ? agile : p == Preset::non_agile ? non_agile : ultra;
}

}  // namespace

TEST_CASE("failure_sdf") {
  const Grid3 g = Grid3::square(9, 9, 4);
  const auto h = failure_sdf({0, 0, 1}, g);
  CHECK(h.at(4, 4, 0) == doctest::Approx(-1.0));
  CHECK(h.at(6, 4, 2) == doctest::Approx(1.0));
  CHECK(h.at(5, 4, 3) == doctest::Approx(0.0));
  const auto f = failure_mask({0, 0, 1}, g);
  CHECK(f[g.flat(4, 4, 1)]);
  CHECK_FALSE(f[g.flat(5, 4, 1)]);
  CHECK(f.count() == 4u);
}

TEST_CASE("vi_step fixed points and clamping") {
  const Grid3& g = grid21();
  const auto m = preset(Preset::agile);
  const double dt = stable_time_step(m, g, 0.8);

  SUBCASE("constant V above constant h collapses to h") {
    const auto r = vi_step(m, ScalarField(g, 2.0), ScalarField(g, -0.5), dt);
    for (double v : r.value.values()) CHECK(v == -0.5);
    CHECK(r.delta == doctest::Approx(2.5));
  }
  SUBCASE("V = h with a constant field is a fixed point") {
    const ScalarField h(g, 1.0);
    const auto r = vi_step(m, h, h, dt);
    CHECK(r.delta == 0.0);
  }
  SUBCASE("one step from h shrinks V next to the obstacle") {
    const auto h = failure_sdf({}, g);
    const auto r = vi_step(m, h, h, dt);
    CHECK(r.delta > 0.0);
    bool dropped_outside = false;
    for (std::size_t n = 0; n < g.size(); ++n) {
      CHECK(r.value[n] <= h[n]);
      if (h[n] > 0.0 && h[n] < 0.5 && r.value[n] < h[n]) dropped_outside = true;
    }
    CHECK(dropped_outside);
  }
  SUBCASE("CFL violation") {
    const auto h = failure_sdf({}, g);
    CHECK_THROWS_AS(vi_step(m, h, h, 2.0 * stable_time_step(m, g, 1.0)), ConfigError);
  }
}

TEST_CASE("stable_time_step honors the CFL number") {
  const Grid3& g = grid21();
  const auto m = preset(Preset::agile);
  const double dt = stable_time_step(m, g, 0.8);
  double worst = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto a = dissipation_bounds(m, g.state(n));
    worst = std::max(worst, a[0] / g.spacing(0) + a[1] / g.spacing(1) + a[2] / g.spacing(2));
  }
  CHECK(dt * worst == doctest::Approx(0.8));
}

TEST_CASE("solve_brt converges with V* <= h and F inside the BRT") {
  const auto h = failure_sdf({}, grid21());
  const auto failure = sublevel_set(h, 0.0);
  for (auto p : {Preset::agile, Preset::non_agile, Preset::ultra_agile}) {
    const auto& r = solved(p);
    CHECK(r.converged);
    CHECK(r.residual < 1e-4);
    CHECK(r.unsafe == sublevel_set(r.value, 0.0));
    for (std::size_t n = 0; n < h.size(); ++n) CHECK(r.value[n] <= h[n]);
    CHECK(failure.is_subset_of(r.unsafe));
  }
}

TEST_CASE("BRT monotonicity in control authority") {
  const auto& agile = solved(Preset::agile);
  const auto& non_agile = solved(Preset::non_agile);
  const auto& ultra = solved(Preset::ultra_agile);
  const auto slack = grid21().size() / 100;
  CHECK((agile.unsafe & ~non_agile.unsafe).count() <= slack);
  CHECK((ultra.unsafe & ~agile.unsafe).count() <= slack);
  CHECK(non_agile.unsafe.count() > agile.unsafe.count());
}

TEST_CASE("BRT monotonicity in disturbance authority") {
  const auto h = failure_sdf({}, grid21());
  auto calm = preset(Preset::agile);
  calm.disturbance = {{-0.3, -0.3}, {0.3, 0.3}};
  auto windy = preset(Preset::agile);
  windy.disturbance = {{-1.0, -1.0}, {1.0, 1.0}};
  const auto a = solve_brt(calm, h).unsafe;
  const auto b = solve_brt(windy, h).unsafe;
  CHECK((a & ~b).count() <= grid21().size() / 100);
  CHECK(b.count() > a.count());
}

TEST_CASE("value sweeps are monotone non-increasing") {
  const Grid3& g = grid21();
  const auto m = preset(Preset::non_agile);
  const auto h = failure_sdf({}, g);
  const double dt = stable_time_step(m, g, 0.8);
  ScalarField v = h;
  for (int it = 0; it < 25; ++it) {
    auto next = vi_step(m, v, h, dt);
    // Linear extrapolation at the domain edge is not a monotone stencil;
    // its error creeps inward by a cell per sweep but stays tiny.
    for (std::size_t n = 0; n < g.size(); ++n) {
      if (h[n] < 1.5) CHECK(next.value[n] <= v[n] + 1e-12);
      CHECK(next.value[n] <= v[n] + 1e-3);
    }
    v = std::move(next.value);
  }
}

TEST_CASE("empty failure set gives an empty BRT") {
  const Grid3& g = grid21();
  const auto r = solve_brt(preset(Preset::non_agile), ScalarField(g, 0.25));
  CHECK(r.unsafe.empty());
  const auto e = brt_of_set(preset(Preset::agile), BoolMask(g));
  CHECK(e.unsafe.empty());
  CHECK(e.converged);
}

TEST_CASE("solver option validation") {
  const auto h = failure_sdf({}, grid21());
  CHECK_THROWS_AS(solve_brt(preset(Preset::agile), h, {0.0, 0.8, 10}), ConfigError);
  CHECK_THROWS_AS(solve_brt(preset(Preset::agile), h, {1e-4, 1.2, 10}), ConfigError);
  const auto capped = solve_brt(preset(Preset::non_agile), h, {1e-4, 0.8, 3});
  CHECK_FALSE(capped.converged);
  CHECK(capped.iterations == 3);
}

TEST_CASE("mask_sdf reproduces the mask") {
  const Grid3& g = grid21();
  const auto f = failure_mask({0.5, -0.3, 1.4}, g);
  CHECK(sublevel_set(mask_sdf(f), 0.0) == f);
  const auto& b = solved(Preset::non_agile).unsafe;
  CHECK(sublevel_set(mask_sdf(b), 0.0) == b);
}

TEST_CASE("brt_of_set") {
  const Grid3& g = grid21();
  const auto m = preset(Preset::agile);
  const auto& direct = solved(Preset::agile).unsafe;
  const auto slack = g.size() / 50;

  const auto via_mask = brt_of_set(m, failure_mask({}, g));
  CHECK(difference(via_mask.unsafe, direct) <= slack);

  const auto again = brt_of_set(m, direct);
  CHECK(difference(again.unsafe, direct) <= slack);

  // A less agile model applied to the agile BRT covers its own BRT.
  const auto& weak = solved(Preset::non_agile).unsafe;
  const auto lifted = brt_of_set(preset(Preset::non_agile), direct).unsafe;
  CHECK((weak & lifted).count() >= 0.98 * static_cast<double>(weak.count()));
}

TEST_CASE("box_samples") {
  CHECK(box_samples(-1.5, 1.5, 3) == std::vector<double>{-1.5, 0.0, 1.5});
  CHECK(box_samples(0.0, 1.0, 2) == std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(box_samples(0.0, 1.0, 1), ConfigError);
}

TEST_CASE("brute-force discrete game") {
  const Grid3& g = grid21();
  const auto m = preset(Preset::agile);
  CHECK(brute_force_brt(m, BoolMask(g), 3, 3, 0.2).empty());
  CHECK(brute_force_brt(m, ~BoolMask(g), 3, 3, 0.2).count() == g.size());

  const auto failure = failure_mask({}, g);
  const auto oracle = brute_force_brt(m, failure, 3, 3, 0.2);
  CHECK(failure.is_subset_of(oracle));
  CHECK(agreement(oracle, solved(Preset::agile).unsafe) >= 0.9);

  // The sampled action sets are not nested, so containment holds only up
  // to a few cells.
  const auto weak = brute_force_brt(preset(Preset::non_agile), failure, 3, 3, 0.2);
  CHECK((oracle & ~weak).count() <= g.size() / 100);

  // Capping iterations gives a subset of the fixed point.
  CHECK(brute_force_brt(m, failure, 3, 3, 0.2, 1).is_subset_of(oracle));
}
