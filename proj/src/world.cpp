#include "wvf/world.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wvf {

WorldSpec::WorldSpec(int state_count, int action_count,
                     std::vector<Transition> transitions,
                     std::vector<double> background_reward, double reward_min,
                     double reward_max)
    : state_count_(state_count),
      action_count_(action_count),
      transitions_(std::move(transitions)),
      background_(std::move(background_reward)),
      reward_min_(reward_min),
      reward_max_(reward_max) {
  if (state_count_ <= 0 || action_count_ <= 0) {
    throw DomainError("world needs at least one state and one action");
  }
  if (!(reward_min_ <= reward_max_)) {
    throw DomainError("reward_min must not exceed reward_max");
  }
  const auto pairs = static_cast<std::size_t>(state_count_) * action_count_;
  if (transitions_.size() != pairs || background_.size() != pairs) {
    throw DomainError("transition and reward tables must cover every (s, a)");
  }
  for (std::size_t i = 0; i < pairs; ++i) {
    if (!valid_state(transitions_[i].next)) {
      std::ostringstream os;
      os << "transition " << i / action_count_ << "," << i % action_count_
         << " leads to unknown state " << transitions_[i].next;
      throw DomainError(os.str());
    }
    if (!transitions_[i].absorbing &&
        (background_[i] < reward_min_ || background_[i] > reward_max_)) {
      throw DomainError("background reward outside [reward_min, reward_max]");
    }
  }
}

void WorldSpec::check(StateId s, ActionId a) const {
  if (!valid_state(s)) {
    throw DomainError("unknown state " + std::to_string(s));
  }
  if (!valid_action(a)) {
    throw DomainError("unknown action " + std::to_string(a));
  }
}

const Transition& WorldSpec::transition(StateId s, ActionId a) const {
  check(s, a);
  return transitions_[index(s, a)];
}

double WorldSpec::background_reward(StateId s, ActionId a) const {
  check(s, a);
  return background_[index(s, a)];
}

bool WorldSpec::has_terminal_action(StateId s) const {
  for (ActionId a = 0; a < action_count_; ++a) {
    if (transitions_[index(s, a)].absorbing) return true;
  }
  return false;
}

std::vector<StateId> WorldSpec::terminal_states() const {
  std::vector<StateId> out;
  for (StateId s = 0; s < state_count_; ++s) {
    if (has_terminal_action(s)) out.push_back(s);
  }
  return out;
}

TaskSpec::TaskSpec(std::string name, int state_count, int action_count,
                   std::vector<double> terminal_reward)
    : name_(std::move(name)),
      state_count_(state_count),
      action_count_(action_count),
      terminal_(std::move(terminal_reward)) {
  if (terminal_.size() !=
      static_cast<std::size_t>(state_count_) * action_count_) {
    throw DomainError("task '" + name_ + "' reward table has wrong size");
  }
}

TaskSpec TaskSpec::from_goals(std::string name, const WorldSpec& world,
                              const std::vector<StateId>& goals,
                              double on_goal, double off_goal) {
  std::vector<bool> is_goal(world.state_count(), false);
  for (StateId g : goals) {
    if (!world.valid_state(g)) {
      throw DomainError("goal " + std::to_string(g) + " is not a state");
    }
    is_goal[g] = true;
  }
  std::vector<double> values(
      static_cast<std::size_t>(world.state_count()) * world.action_count(),
      0.0);
  for (StateId s = 0; s < world.state_count(); ++s) {
    for (ActionId a = 0; a < world.action_count(); ++a) {
      if (world.transition(s, a).absorbing) {
        values[static_cast<std::size_t>(s) * world.action_count() + a] =
            is_goal[s] ? on_goal : off_goal;
      }
    }
  }
  return TaskSpec(std::move(name), world.state_count(), world.action_count(),
                  std::move(values));
}

double TaskSpec::terminal_reward(StateId s, ActionId a) const {
  if (s < 0 || s >= state_count_ || a < 0 || a >= action_count_) {
    throw DomainError("task '" + name_ + "': unknown state/action");
  }
  return terminal_[static_cast<std::size_t>(s) * action_count_ + a];
}

void TaskSpec::validate_against(const WorldSpec& world) const {
  if (state_count_ != world.state_count() ||
      action_count_ != world.action_count()) {
    throw DomainError("task '" + name_ + "' does not match the world's shape");
  }
  for (StateId s = 0; s < state_count_; ++s) {
    for (ActionId a = 0; a < action_count_; ++a) {
      if (!world.transition(s, a).absorbing) continue;
      const double r = terminal_reward(s, a);
      if (!std::isfinite(r) || r < world.reward_min() ||
          r > world.reward_max()) {
        std::ostringstream os;
        os << "task '" << name_ << "': terminal reward " << r << " at (" << s
           << "," << a << ") outside [" << world.reward_min() << ", "
           << world.reward_max() << "]";
        throw DomainError(os.str());
      }
    }
  }
}

std::optional<double> TaskSpec::max_terminal_reward(const WorldSpec& world,
                                                    StateId s) const {
  std::optional<double> best;
  for (ActionId a = 0; a < world.action_count(); ++a) {
    if (!world.transition(s, a).absorbing) continue;
    const double r = terminal_reward(s, a);
    if (!best || r > *best) best = r;
  }
  return best;
}

double default_min_penalty(const WorldSpec& world) {
  return (world.reward_min() - world.reward_max()) * world.state_count();
}

Task::Task(std::shared_ptr<const WorldSpec> world, TaskSpec spec,
           std::optional<double> min_penalty)
    : world_(std::move(world)), spec_(std::move(spec)) {
  if (!world_) throw DomainError("task needs a world");
  spec_.validate_against(*world_);
  penalty_.min_penalty = min_penalty.value_or(default_min_penalty(*world_));
  if (!(penalty_.min_penalty < world_->reward_min())) {
    std::ostringstream os;
    os << "min_penalty " << penalty_.min_penalty
       << " must be strictly below reward_min " << world_->reward_min();
    throw DomainError(os.str());
  }
}

double compose_task_reward(const WorldSpec& world, const TaskSpec& task,
                           StateId s, ActionId a, StateId s_next,
                           bool absorbing) {
  world.check(s, a);
  if (!world.valid_state(s_next)) {
    throw DomainError("unknown successor state " + std::to_string(s_next));
  }
  return absorbing ? task.terminal_reward(s, a) : world.background_reward(s, a);
}

double Task::reward(StateId s, ActionId a, StateId s_next,
                    bool absorbing) const {
  return compose_task_reward(*world_, spec_, s, a, s_next, absorbing);
}

double Task::extended_reward(StateId s, StateId g, ActionId a,
                             StateId s_next, bool absorbing) const {
  if (!world_->valid_state(g)) {
    throw DomainError("unknown goal " + std::to_string(g));
  }
  const double r = reward(s, a, s_next, absorbing);
  return (absorbing && g != s) ? penalty_.min_penalty : r;
}

GoalBuffer::GoalBuffer(int state_count) : member_(state_count, false) {}

bool GoalBuffer::insert(StateId s) {
  if (s < 0 || static_cast<std::size_t>(s) >= member_.size()) {
    throw DomainError("goal " + std::to_string(s) + " is not a state");
  }
  if (member_[s]) return false;
  member_[s] = true;
  order_.push_back(s);
  return true;
}

bool GoalBuffer::contains(StateId s) const {
  return s >= 0 && static_cast<std::size_t>(s) < member_.size() && member_[s];
}

std::vector<StateId> GoalBuffer::sorted() const {
  std::vector<StateId> out = order_;
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace wvf
