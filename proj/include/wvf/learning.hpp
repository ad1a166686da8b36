#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "wvf/grid.hpp"
#include "wvf/table.hpp"
#include "wvf/world.hpp"

namespace wvf {

struct LearnConfig {
  double learning_rate = 0.5;
  double exploration = 0.3;
  long episodes = 50000;
  int max_steps = 100;
  double discount = 1.0;
  std::uint64_t seed = 0;
  /// Table initialisation; values above 0 give optimistic initialisation.
  double initial_value = 0.0;

  void validate() const;
};

struct EpisodeStats {
  long episode = 0;
  double episode_return = 0.0;
  int steps = 0;
  std::size_t buffer_size = 0;
};

/// One environment transition as seen by the learner, after the buffer was
/// updated and all goal-relabelled TD updates were applied.
struct StepEvent {
  long episode = 0;
  StateId state = 0;
  ActionId action = 0;
  StateId next = 0;
  bool absorbing = false;
  double reward = 0.0;
  std::size_t updates = 0;
  std::size_t buffer_size = 0;
};

using StepObserver = std::function<void(const StepEvent&)>;

struct LearnResult {
  /// Goal axis restricted to the final buffer, ascending state order.
  WVFTable table;
  GoalBuffer buffer;
  std::vector<EpisodeStats> curve;
  long total_updates = 0;
};

/// entry <- entry + α (r̄ + γ · (absorbing ? 0 : max_a' Q̄(s', g', a')) - entry)
void td_update(WVFTable& table, StateId s, int goal_index, ActionId a,
               double extended_reward, StateId s_next, bool absorbing,
               double learning_rate, double discount);

/// Uniform draw from the buffer; nullopt when it is empty.
std::optional<StateId> sample_goal(const GoalBuffer& buffer,
                                   std::mt19937_64& rng);

/// Q-learning for world value functions with a growing goal buffer and
/// all-goals relabelling. Episodes run until an absorbing transition or
/// `max_steps`. Until the buffer has its first goal, actions are uniform.
LearnResult learn_wvf(const Environment& env, const LearnConfig& config,
                      const StepObserver& observer = {});

/// CSV with header `episode,return,steps,buffer_size`.
void write_learning_curve(std::ostream& out,
                          const std::vector<EpisodeStats>& curve);

}  // namespace wvf
