#pragma once

#include <optional>
#include <vector>

#include "reachkit/grid.hpp"
#include "reachkit/tasks.hpp"

namespace reachkit {

// Learned constraint with values in [-1, 1]; cells above `threshold` are
// predicted unsafe.
struct ConstraintField {
  ScalarField values;
  double threshold = 0.6;
  double epsilon = 1e-9;
  int epoch = 0;

  BoolMask unsafe() const { return superlevel_set(values, threshold); }
};

struct ICLConfig {
  int epochs = 5;
  std::vector<Task> tasks;
  double epsilon = 1e-9;
  double penalty = 500.0;
  double tau = 0.05;
  double threshold = 0.6;
};

struct EpochMetrics {
  int epoch = 0;
  std::size_t unsafe_cells = 0;
  double learner_mass_in_unsafe = 0.0;  // fraction of the mixture mass
  double expert_mass_in_unsafe = 0.0;   // fraction of the expert mass
};

struct ICLHistory {
  ScalarField expert_density;
  std::vector<ScalarField> learner_densities;  // per epoch, aggregated over tasks
  std::vector<ConstraintField> constraints;
  std::vector<EpochMetrics> metrics;
};

// Closed-form optimum of the learner-vs-expert logistic objective, squashed
// to [-1, 1]: with p, q the normalized learner and expert densities,
// value = (p - q) / (p + q + eps), i.e. 2 sigmoid(log p/q) - 1. Cells where
// both p and q fall below eps are left at 0.
ConstraintField optimal_classifier(const ScalarField& learner, const ScalarField& expert, double epsilon,
                                   double threshold = 0.6);

// Aggregate soft-optimal expert occupancy against the true failure mask.
ScalarField expert_density(const TabularMDP& mdp, const std::vector<Task>& tasks, const BoolMask& failure,
                           double penalty, double tau);

struct RoundResult {
  ConstraintField constraint;
  ScalarField learner_density;
};

// One outer iteration: solve every task against the current constraint
// (all-safe at epoch 1), then classify the uniform mixture of learner
// densities from epochs 1..n against the expert density.
RoundResult icl_round(const ICLHistory& history, const ICLConfig& config, const ScalarField& expert,
                      const TabularMDP& mdp, int epoch);

// Tasks whose start cell lies in `unsafe`.
std::vector<int> infeasible_tasks(const Grid3& grid, const std::vector<Task>& tasks, const BoolMask& unsafe);

// Full multi-task loop from known expert behavior. `brt`, when given, is used
// to reject tasks that start inside it.
ICLHistory run_mt_icl(const ICLConfig& config, const TabularMDP& mdp, const BoolMask& failure,
                      const std::optional<BoolMask>& brt = std::nullopt);

// Same loop from a precomputed expert density (e.g. logged demonstrations).
ICLHistory run_mt_icl_from_density(const ICLConfig& config, const TabularMDP& mdp, const ScalarField& expert);

// Uniform average of the stored learner densities.
ScalarField learner_mixture(const ICLHistory& history);

}  // namespace reachkit
