#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reachkit/grid.hpp"
#include "reachkit/icl.hpp"
#include "reachkit/reachability.hpp"
#include "reachkit/tasks.hpp"

namespace reachkit {

// Confusion-matrix scores with "unsafe" as the positive class. Ratios whose
// denominator is zero are reported as 0.
struct ClassificationReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double iou = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t support = 0;  // cells evaluated
  std::string restriction = "full_grid";
};

ClassificationReport classification_report(const BoolMask& predicted, const BoolMask& labels,
                                           const std::optional<BoolMask>& restriction = std::nullopt);

// Cells where learner + expert density reaches `threshold`.
BoolMask visited_support(const ScalarField& learner, const ScalarField& expert, double threshold = 1e-6);

struct NestingPair {
  std::size_t smaller_volume = 0;
  std::size_t larger_volume = 0;
  double frac_smaller_in_larger = 1.0;
  double volume_ratio = 1.0;  // larger / smaller
};

// Adjacent-pair containment along a chain of masks ordered from the most to
// the least agile model.
std::vector<NestingPair> nesting_report(const std::vector<BoolMask>& masks);

struct TransferTask {
  int id = 0;
  bool feasible = true;
  double return_borrowed = 0.0;  // under the source model's constraint
  double return_own = 0.0;       // under the target model's own BRT
  double failure_mass_borrowed = 0.0;
  double failure_mass_own = 0.0;
};

struct TransferReport {
  std::string source;
  std::string target;
  std::vector<TransferTask> tasks;
  double mean_return_borrowed = 0.0;
  double mean_return_own = 0.0;
  double relative_gap = 0.0;  // (own - borrowed) / |own|, over feasible tasks
  bool conservative = false;  // relative_gap > 5%
  std::size_t lifted_volume = 0;
  double own_in_lifted = 1.0;  // fraction of BRT_a inside g_a(constraint_b)
  std::vector<int> infeasible;
};

struct TransferInputs {
  std::string source_name;
  BoolMask constraint;  // borrowed unsafe mask from model b
  BoolMask own_brt;     // BRT of the target model
  BoolMask failure;
};

// Compare policies of the MDP's model under a borrowed constraint and under
// its own BRT. Tasks whose start is constrained under either mask are
// skipped; InfeasibleError when none remain.
TransferReport transfer_experiment(const TabularMDP& mdp, const TransferInputs& inputs, const std::vector<Task>& tasks,
                                   const SolverOptions& solver = {});

// Pointwise minimum; the unsafe mask is the intersection of the inputs'.
ConstraintField intersect_constraints(const std::vector<ConstraintField>& constraints);

}  // namespace reachkit
