#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "wvf/grid.hpp"
#include "wvf/table.hpp"
#include "wvf/world.hpp"

namespace wvf {

struct TransitionEstimate {
  StateId successor = 0;
  double residual = 0.0;
};

/// Picks the candidate s' minimising
///   sum_{g in scope} (Q̄(s, g, a) - r̄(s, g, a, s') - γ V̄(s', g))^2
/// for a non-terminal action. `goal_scope` holds state ids that must be goals
/// of the table. Ties go to the lowest state id.
TransitionEstimate infer_transition(const WVFTable& table, const Task& task,
                                    StateId s, ActionId a,
                                    std::span<const StateId> candidates,
                                    std::span<const StateId> goal_scope);

/// Full state space when radius is empty, otherwise N(s) at that radius for
/// both candidates and goals.
struct InferenceScope {
  std::optional<int> radius;
};

class InferredModel {
 public:
  enum class Entry { Unknown, Inferred, Terminal };

  InferredModel(int state_count, int action_count, InferenceScope scope);

  int state_count() const { return state_count_; }
  int action_count() const { return action_count_; }
  const InferenceScope& scope() const { return scope_; }

  void set_inferred(StateId s, ActionId a, TransitionEstimate estimate);
  void set_terminal(StateId s, ActionId a);

  Entry entry(StateId s, ActionId a) const { return kinds_[index(s, a)]; }
  /// Only valid for Inferred entries.
  StateId successor(StateId s, ActionId a) const;
  double residual(StateId s, ActionId a) const;

 private:
  std::size_t index(StateId s, ActionId a) const {
    return static_cast<std::size_t>(s) * action_count_ + a;
  }

  int state_count_;
  int action_count_;
  InferenceScope scope_;
  std::vector<Entry> kinds_;
  std::vector<TransitionEstimate> estimates_;
};

/// Infers every non-terminal (s, a) of the environment's world, using the
/// environment's task for r̄. Terminal actions are recorded as Terminal.
InferredModel infer_model(const WVFTable& table, const Environment& env,
                          const InferenceScope& scope);

/// Same, restricted to the listed states.
InferredModel infer_model(const WVFTable& table, const Environment& env,
                          const InferenceScope& scope,
                          std::span<const StateId> states);

struct ModelAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double rate() const {
    return total == 0 ? 0.0 : static_cast<double>(correct) / total;
  }
};

ModelAccuracy model_accuracy(const InferredModel& model,
                             const WorldSpec& truth);

/// CSV `state,action,successor,residual[,correct]`; the correct column is
/// written only when `truth` is given. Inferred entries only.
void write_model_csv(std::ostream& out, const InferredModel& model,
                     const WorldSpec* truth = nullptr);

struct ImaginedStep {
  StateId state = 0;
  ActionId action = 0;
  double value = 0.0;
  /// value rescaled to [0, 1] over all states for the rollout's target.
  double normalized = 0.0;
};

struct Trajectory {
  std::vector<ImaginedStep> steps;
  /// Ended by choosing a terminal action.
  bool terminated = false;
  /// Stopped because the greedy action had no model entry.
  bool truncated = false;

  std::vector<StateId> states() const;
};

/// Greedy rollout through the inferred model only. With a goal, acts on
/// Q̄(·, goal, ·); without one, on max_g Q̄(·, g, ·).
Trajectory imagined_rollout(const InferredModel& model, const WVFTable& table,
                            StateId start, std::optional<StateId> goal,
                            int horizon);

/// The same greedy rollout stepped through the real environment.
Trajectory real_rollout(const Environment& env, const WVFTable& table,
                        StateId start, std::optional<StateId> goal,
                        int horizon);

}  // namespace wvf
