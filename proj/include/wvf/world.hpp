#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wvf {

using StateId = int;
using ActionId = int;

/// Raised when a state/action/goal identifier or a reward value falls
/// outside what the owning world allows.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Transition {
  StateId next = 0;
  bool absorbing = false;
};

/// Deterministic tabular world: states, actions, transition rule, background
/// reward R_0 and the reward bounds [reward_min, reward_max].
///
/// R_0 is stored per (s, a). Dynamics are deterministic, so the successor is
/// implied by the pair. R_0 is only emitted on non-terminal transitions.
class WorldSpec {
 public:
  WorldSpec(int state_count, int action_count,
            std::vector<Transition> transitions,
            std::vector<double> background_reward, double reward_min,
            double reward_max);

  int state_count() const { return state_count_; }
  int action_count() const { return action_count_; }
  double reward_min() const { return reward_min_; }
  double reward_max() const { return reward_max_; }

  const Transition& transition(StateId s, ActionId a) const;
  double background_reward(StateId s, ActionId a) const;

  bool valid_state(StateId s) const { return s >= 0 && s < state_count_; }
  bool valid_action(ActionId a) const { return a >= 0 && a < action_count_; }
  void check(StateId s, ActionId a) const;

  /// States with at least one absorbing action out of them.
  std::vector<StateId> terminal_states() const;
  bool has_terminal_action(StateId s) const;

 private:
  std::size_t index(StateId s, ActionId a) const {
    return static_cast<std::size_t>(s) * action_count_ + a;
  }

  int state_count_;
  int action_count_;
  std::vector<Transition> transitions_;
  std::vector<double> background_;
  double reward_min_;
  double reward_max_;
};

/// Task-specific terminal reward R^tau over (state, action). Only consulted
/// on transitions whose absorbing flag is set.
class TaskSpec {
 public:
  TaskSpec(std::string name, int state_count, int action_count,
           std::vector<double> terminal_reward);

  /// Builds a task assigning `on_goal` to every terminal (s, a) with s in
  /// `goals` and `off_goal` to every other terminal pair.
  static TaskSpec from_goals(std::string name, const WorldSpec& world,
                             const std::vector<StateId>& goals, double on_goal,
                             double off_goal);

  const std::string& name() const { return name_; }
  double terminal_reward(StateId s, ActionId a) const;
  int state_count() const { return state_count_; }
  int action_count() const { return action_count_; }
  const std::vector<double>& values() const { return terminal_; }

  /// Throws DomainError if shapes disagree with `world` or any terminal
  /// reward lies outside the world's bounds.
  void validate_against(const WorldSpec& world) const;

  /// Largest terminal reward at `s` over actions that are terminal there.
  std::optional<double> max_terminal_reward(const WorldSpec& world,
                                            StateId s) const;

 private:
  std::string name_;
  int state_count_;
  int action_count_;
  std::vector<double> terminal_;
};

struct ExtendedRewardConfig {
  double min_penalty = 0.0;
};

/// (reward_min - reward_max) * |S|.
double default_min_penalty(const WorldSpec& world);

/// World + task + penalty r̄_MIN. Validates on construction.
class Task {
 public:
  Task(std::shared_ptr<const WorldSpec> world, TaskSpec spec,
       std::optional<double> min_penalty = std::nullopt);

  const WorldSpec& world() const { return *world_; }
  std::shared_ptr<const WorldSpec> world_ptr() const { return world_; }
  const TaskSpec& spec() const { return spec_; }
  double min_penalty() const { return penalty_.min_penalty; }

  /// R_M(s, a, s'): background reward on non-terminal transitions, the task's
  /// terminal reward on terminal ones.
  double reward(StateId s, ActionId a, StateId s_next, bool absorbing) const;

  /// r̄(s, g, a, s'): min_penalty when terminating away from g, otherwise
  /// the task reward.
  double extended_reward(StateId s, StateId g, ActionId a, StateId s_next,
                         bool absorbing) const;

 private:
  std::shared_ptr<const WorldSpec> world_;
  TaskSpec spec_;
  ExtendedRewardConfig penalty_;
};

double compose_task_reward(const WorldSpec& world, const TaskSpec& task,
                           StateId s, ActionId a, StateId s_next,
                           bool absorbing);

/// Internal goal space G. Insertion is idempotent; iteration order is
/// insertion order, which keeps sampling reproducible.
class GoalBuffer {
 public:
  explicit GoalBuffer(int state_count);

  bool insert(StateId s);
  bool contains(StateId s) const;
  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }
  const std::vector<StateId>& goals() const { return order_; }
  std::vector<StateId> sorted() const;

 private:
  std::vector<bool> member_;
  std::vector<StateId> order_;
};

}  // namespace wvf
