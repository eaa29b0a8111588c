#include <doctest.h>

#include <cmath>

#include "reachkit/errors.hpp"
#include "reachkit/eval.hpp"
#include "reachkit/icl.hpp"

using namespace reachkit;

namespace {

const Grid3& g5() {
  static const Grid3 g = Grid3::square(5, 5, 3);
  return g;
}

BoolMask mask_of(const Grid3& g, std::initializer_list<std::size_t> cells) {
  BoolMask m(g);
  for (auto c : cells) m.set(c);
  return m;
}

// Minimizer over z of p log(1 + e^-z) + q log(1 + e^z), by golden section.
double logistic_argmin(double p, double q) {
  auto f = [&](double z) { return p * std::log1p(std::exp(-z)) + q * std::log1p(std::exp(z)); };
  double a = -30.0, b = 30.0;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double c = b - r * (b - a), d = a + r * (b - a);
    (f(c) < f(d) ? b : a) = f(c) < f(d) ? d : c;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("optimal classifier is the logistic optimum") {
  ScalarField learner(g5()), expert(g5());
  const double pairs[][2] = {{3.0, 1.0}, {1.0, 3.0}, {2.0, 2.0}, {5.0, 0.5}, {0.2, 4.0}};
  for (std::size_t n = 0; n < 5; ++n) {
    learner[n] = pairs[n][0];
    expert[n] = pairs[n][1];
  }
  const auto c = optimal_classifier(learner, expert, 1e-12);
  for (std::size_t n = 0; n < 5; ++n) {
    const double p = learner[n] / learner.sum(), q = expert[n] / expert.sum();
    CHECK(c.values[n] == doctest::Approx(std::tanh(0.5 * logistic_argmin(p, q))).epsilon(1e-6));
    CHECK(c.values[n] == doctest::Approx(2.0 / (1.0 + q / p) - 1.0).epsilon(1e-9));
  }
  CHECK(c.values[5] == 0.0);  // unvisited by both
  for (double v : c.values.values()) CHECK(std::abs(v) <= 1.0);
  CHECK(c.threshold == 0.6);
  CHECK_THROWS_AS(optimal_classifier(learner, expert, 0.0), ConfigError);
  CHECK_THROWS_AS(optimal_classifier(learner, ScalarField(Grid3::square(5, 5, 4)), 1e-9), ShapeError);
}

TEST_CASE("threshold 0.6 flags a learner/expert ratio above 4") {
  ScalarField learner(g5()), expert(g5());
  learner[0] = 4.1;
  expert[0] = 1.0;
  learner[1] = 3.9;
  expert[1] = 1.0;
  learner[2] = 1.0;
  expert[2] = 0.0;
  learner[3] = 1.0;
  expert[3] = 8.0;
  const BoolMask unsafe = optimal_classifier(learner, expert, 1e-9).unsafe();
  CHECK(unsafe[0]);
  CHECK_FALSE(unsafe[1]);
  CHECK(unsafe[2]);
  CHECK_FALSE(unsafe[3]);
  CHECK(unsafe.count() == 2);
}

TEST_CASE("multi-task ICL on a small grid") {
  const Grid3 g = Grid3::square(15, 15, 9);
  const TabularMDP mdp(g, preset(Preset::agile), MdpParams{});
  ICLConfig cfg;
  cfg.epochs = 3;
  cfg.tasks = ring_tasks(4, 3.0, 0.5, 5);
  const BoolMask failure = failure_mask({}, g);
  const auto h = run_mt_icl(cfg, mdp, failure);
  REQUIRE(h.constraints.size() == 3);
  REQUIRE(h.learner_densities.size() == 3);
  for (int e = 0; e < 3; ++e) {
    CHECK(h.constraints[e].epoch == e + 1);
    CHECK(h.learner_densities[e].sum() == doctest::Approx(4.0 * mdp.params().horizon));
    CHECK(h.metrics[e].unsafe_cells == h.constraints[e].unsafe().count());
    // The expert avoids what the classifier flags far more than the learners do.
    CHECK(h.metrics[e].expert_mass_in_unsafe < h.metrics[e].learner_mass_in_unsafe);
  }
  // The first round is unconstrained, so the learners enter the failure set and get caught.
  CHECK(set_metrics(failure, h.constraints[0].unsafe()).frac_a_in_b > 0.0);
  const auto mix = learner_mixture(h);
  CHECK(mix.sum() == doctest::Approx(4.0 * mdp.params().horizon));
  CHECK(mix[100] == doctest::Approx((h.learner_densities[0][100] + h.learner_densities[1][100] +
                                     h.learner_densities[2][100]) / 3.0));

  ICLHistory empty{h.expert_density, {}, {}, {}};
  CHECK_THROWS_AS(icl_round(empty, cfg, h.expert_density, mdp, 2), ConfigError);
  CHECK_THROWS_AS(learner_mixture(empty), ConfigError);
  ICLConfig bad = cfg;
  bad.epochs = 0;
  CHECK_THROWS_AS(run_mt_icl(bad, mdp, failure), ConfigError);
  bad = cfg;
  bad.tasks[0].start = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(run_mt_icl(bad, mdp, failure), ConfigError);
}

TEST_CASE("infeasible_tasks") {
  const Grid3& g = g5();
  std::vector<Task> tasks(3);
  tasks[0].id = 0;
  tasks[0].start = {0.0, 0.0, 0.0};
  tasks[1].id = 1;
  tasks[1].start = {-4.0, -4.0, 0.0};
  tasks[2].id = 2;
  tasks[2].start = {7.0, 0.0, 0.0};
  const auto bad = infeasible_tasks(g, tasks, mask_of(g, {g.flat(2, 2, 0), g.flat(2, 2, 1), g.flat(2, 2, 2)}));
  CHECK(bad == std::vector<int>{0, 2});
}

TEST_CASE("classification report") {
  const Grid3& g = g5();
  const BoolMask pred = mask_of(g, {0, 1, 2, 3});
  const BoolMask label = mask_of(g, {2, 3, 4});
  const auto r = classification_report(pred, label);
  CHECK(r.tp == 2);
  CHECK(r.fp == 2);
  CHECK(r.fn == 1);
  CHECK(r.tn == g.size() - 5);
  CHECK(r.support == g.size());
  CHECK(r.precision == doctest::Approx(0.5));
  CHECK(r.recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.f1 == doctest::Approx(4.0 / 7.0));
  CHECK(r.iou == doctest::Approx(0.4));
  CHECK(r.accuracy == doctest::Approx((g.size() - 3.0) / g.size()));
  CHECK(r.restriction == "full_grid");

  const auto restricted = classification_report(pred, label, mask_of(g, {0, 2, 4, 9}));
  CHECK(restricted.support == 4);
  CHECK(restricted.tp == 1);
  CHECK(restricted.fp == 1);
  CHECK(restricted.fn == 1);
  CHECK(restricted.tn == 1);
  CHECK(restricted.restriction == "visited_support");

  const auto none = classification_report(BoolMask(g), BoolMask(g));
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.iou == 0.0);
  CHECK(none.accuracy == 1.0);
  CHECK_THROWS_AS(classification_report(pred, BoolMask(Grid3::square(5, 5, 4))), ShapeError);
}

TEST_CASE("visited support") {
  ScalarField l(g5()), e(g5());
  l[0] = 1e-7;
  e[0] = 1e-6;
  l[1] = 5e-7;
  e[2] = 3.0;
  const auto s = visited_support(l, e);
  CHECK(s[0]);
  CHECK_FALSE(s[1]);
  CHECK(s[2]);
  CHECK(s.count() == 2);
}

TEST_CASE("nesting report") {
  const Grid3& g = g5();
  const auto r = nesting_report({mask_of(g, {1, 2}), mask_of(g, {1, 2, 3, 4}), mask_of(g, {1, 3, 4, 5})});
  REQUIRE(r.size() == 2);
  CHECK(r[0].frac_smaller_in_larger == 1.0);
  CHECK(r[0].volume_ratio == 2.0);
  CHECK(r[1].frac_smaller_in_larger == doctest::Approx(0.75));
  CHECK(r[1].volume_ratio == 1.0);
  CHECK(nesting_report({BoolMask(g), BoolMask(g)})[0].volume_ratio == 1.0);
}

TEST_CASE("intersect constraints") {
  ConstraintField a{ScalarField(g5())}, b{ScalarField(g5())};
  a.values[0] = 0.9;
  b.values[0] = 0.7;
  a.values[1] = 0.9;
  b.values[1] = -0.2;
  const auto c = intersect_constraints({a, b});
  CHECK(c.values[0] == 0.7);
  CHECK(c.values[1] == -0.2);
  CHECK(c.unsafe() == (a.unsafe() & b.unsafe()));
  b.threshold = 0.5;
  CHECK_THROWS_AS(intersect_constraints({a, b}), ConfigError);
  CHECK_THROWS_AS(intersect_constraints({}), ConfigError);
}

TEST_CASE("transfer experiment") {
  const Grid3 g = Grid3::square(15, 15, 9);
  const TabularMDP mdp(g, preset(Preset::agile), MdpParams{});
  const BoolMask failure = failure_mask({}, g);
  auto tasks = ring_tasks(3, 3.0, 0.5, 2);

  // Borrowing the own mask reproduces the own policy exactly.
  const auto same = transfer_experiment(mdp, {"same", failure, failure, failure}, tasks);
  CHECK(same.target == "agile");
  CHECK(same.source == "same");
  CHECK(same.infeasible.empty());
  for (const auto& t : same.tasks) CHECK(t.return_borrowed == doctest::Approx(t.return_own).epsilon(1e-12));
  CHECK(same.relative_gap == doctest::Approx(0.0));
  CHECK_FALSE(same.conservative);
  CHECK(same.own_in_lifted == 1.0);

  // A wider borrowed mask costs return.
  const BoolMask wide = failure_mask({0.0, 0.0, 1.8}, g);
  const auto cons = transfer_experiment(mdp, {"wide", wide, failure, failure}, tasks);
  CHECK(cons.mean_return_borrowed < cons.mean_return_own);
  CHECK(cons.relative_gap > 0.0);

  tasks[0].start = {0.0, 0.0, 0.0};
  const auto partial = transfer_experiment(mdp, {"same", failure, failure, failure}, tasks);
  CHECK(partial.infeasible == std::vector<int>{tasks[0].id});
  CHECK_FALSE(partial.tasks[0].feasible);
  for (auto& t : tasks) t.start = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(transfer_experiment(mdp, {"same", failure, failure, failure}, tasks), InfeasibleError);
}
