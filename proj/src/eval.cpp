#include "reachkit/eval.hpp"

#include <algorithm>
#include <cmath>

#include "reachkit/errors.hpp"

namespace reachkit {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassificationReport classification_report(const BoolMask& predicted, const BoolMask& labels,
                                           const std::optional<BoolMask>& restriction) {
  require_same_grid(predicted.grid(), labels.grid(), "classification_report");
  if (restriction) require_same_grid(predicted.grid(), restriction->grid(), "classification_report");
  ClassificationReport r;
  r.restriction = restriction ? "visited_support" : "full_grid";
  for (std::size_t n = 0; n < predicted.size(); ++n) {
    if (restriction && !(*restriction)[n]) continue;
    const bool p = predicted[n], l = labels[n];
    if (p && l) {
      ++r.tp;
    } else if (p) {
      ++r.fp;
    } else if (l) {
      ++r.fn;
    } else {
      ++r.tn;
    }
  }
  r.support = r.tp + r.fp + r.fn + r.tn;
  r.accuracy = ratio(r.tp + r.tn, r.support);
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.iou = ratio(r.tp, r.tp + r.fp + r.fn);
  return r;
}

BoolMask visited_support(const ScalarField& learner, const ScalarField& expert, double threshold) {
  require_same_grid(learner.grid(), expert.grid(), "visited_support");
  BoolMask out(learner.grid());
  for (std::size_t n = 0; n < out.size(); ++n) out.set(n, learner[n] + expert[n] >= threshold);
  return out;
}

std::vector<NestingPair> nesting_report(const std::vector<BoolMask>& masks) {
  std::vector<NestingPair> out;
  for (std::size_t i = 0; i + 1 < masks.size(); ++i) {
    const BoolMask& a = masks[i];
    const BoolMask& b = masks[i + 1];
    require_same_grid(a.grid(), b.grid(), "nesting_report");
    NestingPair p;
    p.smaller_volume = a.count();
    p.larger_volume = b.count();
    p.frac_smaller_in_larger = set_metrics(a, b).frac_a_in_b;
    p.volume_ratio = p.smaller_volume == 0 ? (p.larger_volume == 0 ? 1.0 : INFINITY)
                                           : static_cast<double>(p.larger_volume) / static_cast<double>(p.smaller_volume);
    out.push_back(p);
  }
  return out;
}

TransferReport transfer_experiment(const TabularMDP& mdp, const TransferInputs& inputs, const std::vector<Task>& tasks,
                                   const SolverOptions& solver) {
  const Grid3& g = mdp.grid();
  require_same_grid(g, inputs.constraint.grid(), "transfer_experiment");
  require_same_grid(g, inputs.own_brt.grid(), "transfer_experiment");
  require_same_grid(g, inputs.failure.grid(), "transfer_experiment");

  TransferReport report;
  report.source = inputs.source_name;
  report.target = mdp.model().name;
  const auto blocked = infeasible_tasks(g, tasks, inputs.constraint | inputs.own_brt);
  const double h = mdp.params().horizon;
  double sum_b = 0.0, sum_a = 0.0;
  for (const auto& task : tasks) {
    TransferTask t;
    t.id = task.id;
    if (std::find(blocked.begin(), blocked.end(), task.id) != blocked.end()) {
      t.feasible = false;
      report.infeasible.push_back(task.id);
      report.tasks.push_back(t);
      continue;
    }
    const auto borrowed = soft_cvi(mdp, task, inputs.constraint);
    const auto own = soft_cvi(mdp, task, inputs.own_brt);
    t.return_borrowed = expected_return(mdp, borrowed.policy, task);
    t.return_own = expected_return(mdp, own.policy, task);
    t.failure_mass_borrowed = mass_in(visitation_exact(mdp, borrowed.policy, task), inputs.failure) / h;
    t.failure_mass_own = mass_in(visitation_exact(mdp, own.policy, task), inputs.failure) / h;
    sum_b += t.return_borrowed;
    sum_a += t.return_own;
    report.tasks.push_back(t);
  }
  const std::size_t feasible = tasks.size() - report.infeasible.size();
  if (feasible == 0) {
    throw InfeasibleError("transfer " + report.source + " -> " + report.target + ": every task is infeasible");
  }
  report.mean_return_borrowed = sum_b / static_cast<double>(feasible);
  report.mean_return_own = sum_a / static_cast<double>(feasible);
  report.relative_gap = report.mean_return_own != 0.0
                            ? (report.mean_return_own - report.mean_return_borrowed) / std::abs(report.mean_return_own)
                            : 0.0;
  report.conservative = report.relative_gap > 0.05;

  const auto lifted = brt_of_set(mdp.model(), inputs.constraint, solver).unsafe;
  report.lifted_volume = lifted.count();
  report.own_in_lifted = set_metrics(inputs.own_brt, lifted).frac_a_in_b;
  return report;
}

ConstraintField intersect_constraints(const std::vector<ConstraintField>& constraints) {
  if (constraints.empty()) throw ConfigError("intersect_constraints needs at least one constraint");
  ConstraintField out = constraints.front();
  for (std::size_t i = 1; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    require_same_grid(out.values.grid(), c.values.grid(), "intersect_constraints");
    if (c.threshold != out.threshold) throw ConfigError("intersect_constraints needs a shared threshold");
    for (std::size_t n = 0; n < out.values.size(); ++n) out.values[n] = std::min(out.values[n], c.values[n]);
  }
  return out;
}

}  // namespace reachkit
