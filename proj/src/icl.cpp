#include "reachkit/icl.hpp"

#include <string>

#include "reachkit/errors.hpp"

namespace reachkit {

ConstraintField optimal_classifier(const ScalarField& learner, const ScalarField& expert, double epsilon,
                                   double threshold) {
  require_same_grid(learner.grid(), expert.grid(), "optimal_classifier");
  if (!(epsilon > 0.0)) throw ConfigError("classifier epsilon must be positive");
  const double pl = learner.sum();
  const double pe = expert.sum();
  ScalarField out(learner.grid());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double p = pl > 0.0 ? learner[n] / pl : 0.0;
    const double q = pe > 0.0 ? expert[n] / pe : 0.0;
    if (p < epsilon && q < epsilon) continue;
    out[n] = (p - q) / (p + q + epsilon);
  }
  return {std::move(out), threshold, epsilon, 0};
}

ScalarField expert_density(const TabularMDP& mdp, const std::vector<Task>& tasks, const BoolMask& failure,
                           double penalty, double tau) {
  ScalarField total(mdp.grid());
  for (const auto& task : tasks) {
    const auto sol = soft_cvi(mdp, task, failure, penalty, tau);
    const auto rho = visitation_exact(mdp, sol.policy, task);
    for (std::size_t n = 0; n < total.size(); ++n) total[n] += rho[n];
  }
  return total;
}

ScalarField learner_mixture(const ICLHistory& history) {
  if (history.learner_densities.empty()) throw ConfigError("no learner densities recorded");
  ScalarField mix = aggregate_density(history.learner_densities);
  const double w = 1.0 / static_cast<double>(history.learner_densities.size());
  for (auto& v : mix.values()) v *= w;
  return mix;
}

RoundResult icl_round(const ICLHistory& history, const ICLConfig& config, const ScalarField& expert,
                      const TabularMDP& mdp, int epoch) {
  if (epoch < 1) throw ConfigError("epochs are numbered from 1");
  if (static_cast<std::size_t>(epoch - 1) != history.learner_densities.size()) {
    throw ConfigError("icl_round called out of order");
  }
  const Grid3& g = mdp.grid();
  const BoolMask current = epoch == 1 ? BoolMask(g) : history.constraints.back().unsafe();

  ScalarField learner(g);
  for (const auto& task : config.tasks) {
    SoftCviResult sol = [&] {
      try {
        return soft_cvi(mdp, task, current, config.penalty, config.tau);
      } catch (const InfeasibleError&) {
        throw InfeasibleError("epoch " + std::to_string(epoch) + ": task " + std::to_string(task.id) +
                              " is infeasible under the current constraint");
      }
    }();
    const auto rho = visitation_exact(mdp, sol.policy, task);
    for (std::size_t n = 0; n < learner.size(); ++n) learner[n] += rho[n];
  }

  ScalarField mix = learner;
  for (const auto& past : history.learner_densities) {
    for (std::size_t n = 0; n < mix.size(); ++n) mix[n] += past[n];
  }
  for (auto& v : mix.values()) v /= static_cast<double>(epoch);

  ConstraintField c = optimal_classifier(mix, expert, config.epsilon, config.threshold);
  c.epoch = epoch;
  return {std::move(c), std::move(learner)};
}

std::vector<int> infeasible_tasks(const Grid3& grid, const std::vector<Task>& tasks, const BoolMask& unsafe) {
  std::vector<int> bad;
  for (const auto& t : tasks) {
    if (!grid.contains_xy(t.start.x, t.start.y) || unsafe[grid.flat(grid.nearest(t.start))]) bad.push_back(t.id);
  }
  return bad;
}

namespace {

void check_config(const ICLConfig& config) {
  if (config.epochs < 1) throw ConfigError("icl.epochs must be >= 1");
  if (!(config.epsilon > 0.0)) throw ConfigError("icl.epsilon must be positive");
  if (config.tasks.empty()) throw ConfigError("icl needs at least one task");
}

std::string id_list(const std::vector<int>& ids) {
  std::string s;
  for (int id : ids) s += (s.empty() ? "" : ", ") + std::to_string(id);
  return s;
}

}  // namespace

ICLHistory run_mt_icl_from_density(const ICLConfig& config, const TabularMDP& mdp, const ScalarField& expert) {
  check_config(config);
  require_same_grid(mdp.grid(), expert.grid(), "run_mt_icl");
  ICLHistory history{expert, {}, {}, {}};
  const double expert_total = expert.sum();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    RoundResult round = icl_round(history, config, expert, mdp, epoch);
    history.learner_densities.push_back(std::move(round.learner_density));
    const BoolMask unsafe = round.constraint.unsafe();
    const ScalarField mix = learner_mixture(history);
    EpochMetrics m;
    m.epoch = epoch;
    m.unsafe_cells = unsafe.count();
    m.learner_mass_in_unsafe = mass_in(mix, unsafe) / mix.sum();
    m.expert_mass_in_unsafe = expert_total > 0.0 ? mass_in(expert, unsafe) / expert_total : 0.0;
    history.metrics.push_back(m);
    history.constraints.push_back(std::move(round.constraint));
  }
  return history;
}

ICLHistory run_mt_icl(const ICLConfig& config, const TabularMDP& mdp, const BoolMask& failure,
                      const std::optional<BoolMask>& brt) {
  check_config(config);
  const auto bad = infeasible_tasks(mdp.grid(), config.tasks, brt ? (*brt | failure) : failure);
  if (!bad.empty()) throw ConfigError("tasks start inside the unsafe set: " + id_list(bad));
  const ScalarField expert = expert_density(mdp, config.tasks, failure, config.penalty, config.tau);
  return run_mt_icl_from_density(config, mdp, expert);
}

}  // namespace reachkit
