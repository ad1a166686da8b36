#include "wvf/dynamics.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace wvf {

TransitionEstimate infer_transition(const WVFTable& table, const Task& task,
                                    StateId s, ActionId a,
                                    std::span<const StateId> candidates,
                                    std::span<const StateId> goal_scope) {
  if (candidates.empty()) throw DomainError("no candidate successors");
  if (goal_scope.empty()) throw DomainError("empty goal scope");
  std::vector<int> goal_ordinals;
  goal_ordinals.reserve(goal_scope.size());
  for (StateId g : goal_scope) {
    const auto gi = table.goal_index(g);
    if (!gi) throw DomainError("state " + std::to_string(g) + " is not a goal");
    goal_ordinals.push_back(*gi);
  }
  const double discount = table.meta.discount;
  TransitionEstimate best{0, std::numeric_limits<double>::infinity()};
  bool have = false;
  for (StateId c : candidates) {
    double sum = 0.0;
    for (std::size_t k = 0; k < goal_scope.size(); ++k) {
      const int gi = goal_ordinals[k];
      const double r_bar = task.extended_reward(s, goal_scope[k], a, c, false);
      const double d = table.at(s, gi, a) - r_bar - discount * table.value(c, gi);
      sum += d * d;
    }
    if (!have || sum < best.residual ||
        (sum == best.residual && c < best.successor)) {
      best = {c, sum};
      have = true;
    }
  }
  return best;
}

InferredModel::InferredModel(int state_count, int action_count,
                             InferenceScope scope)
    : state_count_(state_count),
      action_count_(action_count),
      scope_(scope),
      kinds_(static_cast<std::size_t>(state_count) * action_count,
             Entry::Unknown),
      estimates_(kinds_.size()) {}

void InferredModel::set_inferred(StateId s, ActionId a,
                                 TransitionEstimate estimate) {
  kinds_[index(s, a)] = Entry::Inferred;
  estimates_[index(s, a)] = estimate;
}

void InferredModel::set_terminal(StateId s, ActionId a) {
  kinds_[index(s, a)] = Entry::Terminal;
}

StateId InferredModel::successor(StateId s, ActionId a) const {
  if (entry(s, a) != Entry::Inferred) {
    throw DomainError("no inferred successor for (" + std::to_string(s) + "," +
                      std::to_string(a) + ")");
  }
  return estimates_[index(s, a)].successor;
}

double InferredModel::residual(StateId s, ActionId a) const {
  if (entry(s, a) != Entry::Inferred) {
    throw DomainError("no inferred successor for (" + std::to_string(s) + "," +
                      std::to_string(a) + ")");
  }
  return estimates_[index(s, a)].residual;
}

InferredModel infer_model(const WVFTable& table, const Environment& env,
                          const InferenceScope& scope,
                          std::span<const StateId> states) {
  const WorldSpec& world = env.world();
  if (table.state_count() != world.state_count() ||
      table.action_count() != world.action_count()) {
    throw DomainError("table does not match the environment");
  }
  if (scope.radius && *scope.radius < 0) {
    throw DomainError("neighbourhood radius must be >= 0");
  }
  std::vector<StateId> all(world.state_count());
  for (StateId s = 0; s < world.state_count(); ++s) all[s] = s;

  InferredModel model(world.state_count(), world.action_count(), scope);
  for (StateId s : states) {
    std::vector<StateId> candidates =
        scope.radius ? env.neighbourhood(s, *scope.radius) : all;
    std::vector<StateId> goals;
    for (StateId g : candidates) {
      if (table.goal_index(g)) goals.push_back(g);
    }
    // A neighbourhood without any learned goal falls back to every goal.
    if (goals.empty()) goals = table.goals();
    for (ActionId a = 0; a < world.action_count(); ++a) {
      if (world.transition(s, a).absorbing) {
        model.set_terminal(s, a);
        continue;
      }
      model.set_inferred(
          s, a, infer_transition(table, env.task(), s, a, candidates, goals));
    }
  }
  return model;
}

InferredModel infer_model(const WVFTable& table, const Environment& env,
                          const InferenceScope& scope) {
  std::vector<StateId> all(env.world().state_count());
  for (StateId s = 0; s < env.world().state_count(); ++s) all[s] = s;
  return infer_model(table, env, scope, all);
}

ModelAccuracy model_accuracy(const InferredModel& model,
                             const WorldSpec& truth) {
  ModelAccuracy acc;
  for (StateId s = 0; s < model.state_count(); ++s) {
    for (ActionId a = 0; a < model.action_count(); ++a) {
      if (model.entry(s, a) != InferredModel::Entry::Inferred) continue;
      ++acc.total;
      if (model.successor(s, a) == truth.transition(s, a).next) ++acc.correct;
    }
  }
  return acc;
}

void write_model_csv(std::ostream& out, const InferredModel& model,
                     const WorldSpec* truth) {
  out << "state,action,successor,residual";
  if (truth) out << ",correct";
  out << '\n';
  for (StateId s = 0; s < model.state_count(); ++s) {
    for (ActionId a = 0; a < model.action_count(); ++a) {
      if (model.entry(s, a) != InferredModel::Entry::Inferred) continue;
      out << s << ',' << a << ',' << model.successor(s, a) << ','
          << format_double(model.residual(s, a));
      if (truth) {
        out << ',' << (model.successor(s, a) == truth->transition(s, a).next);
      }
      out << '\n';
    }
  }
}

std::vector<StateId> Trajectory::states() const {
  std::vector<StateId> out;
  out.reserve(steps.size());
  for (const ImaginedStep& st : steps) out.push_back(st.state);
  return out;
}

namespace {

// Per-state value for the rollout target and the range used to normalise it.
struct ValueView {
  std::vector<double> values;
  double lo = 0.0;
  double hi = 0.0;

  double normalized(StateId s) const {
    return hi > lo ? (values[s] - lo) / (hi - lo) : 0.5;
  }
};

ValueView value_view(const WVFTable& table, std::optional<int> goal_index) {
  ValueView view;
  view.values.resize(table.state_count());
  for (StateId s = 0; s < table.state_count(); ++s) {
    if (goal_index) {
      view.values[s] = table.value(s, *goal_index);
    } else {
      double best = table.value(s, 0);
      for (int gi = 1; gi < table.goal_count(); ++gi) {
        best = std::max(best, table.value(s, gi));
      }
      view.values[s] = best;
    }
  }
  const auto [lo, hi] =
      std::minmax_element(view.values.begin(), view.values.end());
  view.lo = *lo;
  view.hi = *hi;
  return view;
}

ActionId greedy_action(const WVFTable& table, StateId s,
                       std::optional<int> goal_index) {
  if (goal_index) return table.greedy(s, *goal_index);
  std::vector<double> best(table.action_count());
  for (ActionId a = 0; a < table.action_count(); ++a) {
    double v = table.at(s, 0, a);
    for (int gi = 1; gi < table.goal_count(); ++gi) {
      v = std::max(v, table.at(s, gi, a));
    }
    best[a] = v;
  }
  return argmax(best);
}

std::optional<int> resolve_goal(const WVFTable& table,
                                std::optional<StateId> goal) {
  if (table.goal_count() == 0) throw DomainError("table has no goals");
  if (!goal) return std::nullopt;
  const auto gi = table.goal_index(*goal);
  if (!gi) throw DomainError("state " + std::to_string(*goal) + " is not a goal");
  return gi;
}

template <typename Advance>
Trajectory rollout(const WVFTable& table, StateId start,
                   std::optional<StateId> goal, int horizon, Advance advance) {
  if (horizon < 1) throw DomainError("rollout horizon must be at least 1");
  const std::optional<int> gi = resolve_goal(table, goal);
  const ValueView view = value_view(table, gi);
  Trajectory traj;
  StateId s = start;
  for (int t = 0; t < horizon; ++t) {
    const ActionId a = greedy_action(table, s, gi);
    traj.steps.push_back({s, a, view.values[s], view.normalized(s)});
    const auto next = advance(s, a, traj);
    if (!next) break;
    s = *next;
  }
  return traj;
}

}  // namespace

Trajectory imagined_rollout(const InferredModel& model, const WVFTable& table,
                            StateId start, std::optional<StateId> goal,
                            int horizon) {
  if (model.state_count() != table.state_count() ||
      model.action_count() != table.action_count()) {
    throw DomainError("model does not match the table");
  }
  return rollout(table, start, goal, horizon,
                 [&](StateId s, ActionId a,
                     Trajectory& traj) -> std::optional<StateId> {
                   switch (model.entry(s, a)) {
                     case InferredModel::Entry::Terminal:
                       traj.terminated = true;
                       return std::nullopt;
                     case InferredModel::Entry::Unknown:
                       traj.truncated = true;
                       return std::nullopt;
                     case InferredModel::Entry::Inferred:
                       break;
                   }
                   return model.successor(s, a);
                 });
}

Trajectory real_rollout(const Environment& env, const WVFTable& table,
                        StateId start, std::optional<StateId> goal,
                        int horizon) {
  return rollout(table, start, goal, horizon,
                 [&](StateId s, ActionId a,
                     Trajectory& traj) -> std::optional<StateId> {
                   const StepResult step = env.step({s, false}, a);
                   if (step.absorbing) {
                     traj.terminated = true;
                     return std::nullopt;
                   }
                   return step.next.agent;
                 });
}

}  // namespace wvf
