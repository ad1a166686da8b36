#include "wvf/learning.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace wvf {

void LearnConfig::validate() const {
  // A zero learning rate is accepted so a run can be used as a no-op probe.
  if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) {
    throw DomainError("learning_rate must lie in [0, 1]");
  }
  if (!(exploration >= 0.0 && exploration <= 1.0)) {
    throw DomainError("exploration must lie in [0, 1]");
  }
  if (episodes <= 0) throw DomainError("episodes must be positive");
  if (max_steps <= 0) throw DomainError("max_steps must be positive");
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw DomainError("discount must lie in (0, 1]");
  }
}

void td_update(WVFTable& table, StateId s, int goal_index, ActionId a,
               double extended_reward, StateId s_next, bool absorbing,
               double learning_rate, double discount) {
  const double future = absorbing ? 0.0 : table.value(s_next, goal_index);
  double& entry = table.at(s, goal_index, a);
  entry += learning_rate * (extended_reward + discount * future - entry);
}

std::optional<StateId> sample_goal(const GoalBuffer& buffer,
                                   std::mt19937_64& rng) {
  if (buffer.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - 1);
  return buffer.goals()[pick(rng)];
}

LearnResult learn_wvf(const Environment& env, const LearnConfig& config,
                      const StepObserver& observer) {
  config.validate();
  const WorldSpec& world = env.world();
  const Task& task = env.task();
  const int n = world.state_count();
  const int na = world.action_count();

  // Goal ordinal == state id while learning; restricted to the buffer at the
  // end.
  std::vector<StateId> all(n);
  std::iota(all.begin(), all.end(), 0);
  WVFTable q(n, all, na, config.initial_value);
  GoalBuffer buffer(n);
  std::vector<EpisodeStats> curve;
  curve.reserve(static_cast<std::size_t>(config.episodes));

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<ActionId> any_action(0, na - 1);
  long total_updates = 0;

  for (long ep = 0; ep < config.episodes; ++ep) {
    EnvState state = env.sample_start(rng);
    const std::optional<StateId> goal = sample_goal(buffer, rng);
    EpisodeStats stats;
    stats.episode = ep;
    for (int t = 0; t < config.max_steps && !state.terminated; ++t) {
      const StateId s = state.agent;
      ActionId a;
      if (!goal || coin(rng) < config.exploration) {
        a = any_action(rng);
      } else {
        a = q.greedy(s, *goal);
      }
      const StepResult step = env.step(state, a);
      if (step.absorbing) buffer.insert(s);
      std::size_t updates = 0;
      for (StateId g : buffer.goals()) {
        const double r_bar = task.extended_reward(s, g, a, step.next.agent,
                                                  step.absorbing);
        td_update(q, s, g, a, r_bar, step.next.agent, step.absorbing,
                  config.learning_rate, config.discount);
        ++updates;
      }
      total_updates += static_cast<long>(updates);
      if (observer) {
        observer({ep, s, a, step.next.agent, step.absorbing, step.reward,
                  updates, buffer.size()});
      }
      stats.episode_return += step.reward;
      ++stats.steps;
      state = step.next;
    }
    stats.buffer_size = buffer.size();
    curve.push_back(stats);
  }

  WVFTable table(n, buffer.sorted(), na);
  for (StateId s = 0; s < n; ++s) {
    for (int gi = 0; gi < table.goal_count(); ++gi) {
      const StateId g = table.goal_state(gi);
      for (ActionId a = 0; a < na; ++a) table.at(s, gi, a) = q.at(s, g, a);
    }
  }
  table.meta.task = task.spec().name();
  table.meta.penalty = task.min_penalty();
  table.meta.discount = config.discount;
  table.meta.iterations = config.episodes;
  table.meta.extra["source"] = "learned";
  table.meta.extra["seed"] = std::to_string(config.seed);
  return {std::move(table), std::move(buffer), std::move(curve),
          total_updates};
}

void write_learning_curve(std::ostream& out,
                          const std::vector<EpisodeStats>& curve) {
  out << "episode,return,steps,buffer_size\n";
  for (const EpisodeStats& e : curve) {
    out << e.episode << ',' << format_double(e.episode_return) << ','
        << e.steps << ',' << e.buffer_size << '\n';
  }
}

}  // namespace wvf
