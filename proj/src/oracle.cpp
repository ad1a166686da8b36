#include "wvf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace wvf {

namespace {

void check_options(const Task& task, const ViOptions& options) {
  if (!(options.tolerance > 0.0)) {
    throw DomainError("value iteration tolerance must be positive");
  }
  if (!(options.discount > 0.0 && options.discount <= 1.0)) {
    throw DomainError("discount must lie in (0, 1]");
  }
  if (!(task.min_penalty() < task.world().reward_min())) {
    throw DomainError("penalty must be below reward_min");
  }
}

// Reward of a (s, a) transition under goal `g`; g < 0 means the plain task.
double backup_reward(const Task& task, StateId s, StateId g, ActionId a,
                     const Transition& t) {
  return g < 0 ? task.reward(s, a, t.next, t.absorbing)
               : task.extended_reward(s, g, a, t.next, t.absorbing);
}

// Solves one slice. `q` holds |S| x |A| values and is updated in place.
// Returns the number of sweeps used.
long solve_slice(const Task& task, StateId goal, const ViOptions& options,
                 long cap, std::vector<double>& q) {
  const WorldSpec& world = task.world();
  const int n = world.state_count();
  const int na = world.action_count();
  std::vector<double> v(n);
  auto refresh_v = [&] {
    for (StateId s = 0; s < n; ++s) {
      const auto* row = q.data() + static_cast<std::size_t>(s) * na;
      v[s] = *std::max_element(row, row + na);
    }
  };
  refresh_v();
  double delta = std::numeric_limits<double>::infinity();
  long sweeps = 0;
  while (sweeps < cap) {
    ++sweeps;
    delta = 0.0;
    for (StateId s = 0; s < n; ++s) {
      for (ActionId a = 0; a < na; ++a) {
        const Transition& t = world.transition(s, a);
        double next = backup_reward(task, s, goal, a, t);
        if (!t.absorbing) next += options.discount * v[t.next];
        double& cur = q[static_cast<std::size_t>(s) * na + a];
        delta = std::max(delta, std::abs(next - cur));
        cur = next;
      }
    }
    refresh_v();
    if (delta <= options.tolerance) return sweeps;
  }
  std::ostringstream os;
  os << "value iteration did not converge within " << cap
     << " sweeps (goal " << goal << ", residual " << delta << ")";
  throw ConvergenceError(os.str(), delta, sweeps);
}

}  // namespace

long default_sweep_cap(const Task& task, const ViOptions& options) {
  const WorldSpec& world = task.world();
  const long n = world.state_count();
  long cap = 10 * n;
  double step_cost = std::numeric_limits<double>::infinity();
  for (StateId s = 0; s < world.state_count(); ++s) {
    for (ActionId a = 0; a < world.action_count(); ++a) {
      if (world.transition(s, a).absorbing) continue;
      step_cost = std::min(step_cost, -world.background_reward(s, a));
    }
  }
  if (step_cost > 0.0 && std::isfinite(step_cost)) {
    const double depth =
        -task.min_penalty() + std::abs(world.reward_min()) * n;
    cap += static_cast<long>(std::ceil(depth / step_cost)) + n;
  }
  if (options.discount < 1.0) {
    const double range = world.reward_max() - task.min_penalty() + 1.0;
    cap += static_cast<long>(std::ceil(
        std::log(options.tolerance / range) / std::log(options.discount)));
  }
  return cap;
}

WVFTable vi_wvf(const Task& task, const std::vector<StateId>& goals,
                const ViOptions& options) {
  check_options(task, options);
  if (goals.empty()) throw DomainError("goal set must be non-empty");
  const WorldSpec& world = task.world();
  const int n = world.state_count();
  const int na = world.action_count();
  const long cap = options.max_sweeps.value_or(default_sweep_cap(task, options));

  WVFTable table(n, goals, na);
  std::vector<double> slice(static_cast<std::size_t>(n) * na);
  long total = 0;
  for (int gi = 0; gi < table.goal_count(); ++gi) {
    std::fill(slice.begin(), slice.end(), 0.0);
    total = std::max(total, solve_slice(task, table.goal_state(gi), options,
                                        cap, slice));
    for (StateId s = 0; s < n; ++s) {
      for (ActionId a = 0; a < na; ++a) {
        table.at(s, gi, a) = slice[static_cast<std::size_t>(s) * na + a];
      }
    }
  }
  table.meta.task = task.spec().name();
  table.meta.penalty = task.min_penalty();
  table.meta.discount = options.discount;
  table.meta.iterations = total;
  table.meta.extra["source"] = "oracle";
  return table;
}

QTable vi_task(const Task& task, const ViOptions& options) {
  check_options(task, options);
  const WorldSpec& world = task.world();
  const int n = world.state_count();
  const int na = world.action_count();
  const long cap = options.max_sweeps.value_or(default_sweep_cap(task, options));
  std::vector<double> q(static_cast<std::size_t>(n) * na, 0.0);
  const long sweeps = solve_slice(task, -1, options, cap, q);
  QTable table(n, na);
  for (StateId s = 0; s < n; ++s) {
    for (ActionId a = 0; a < na; ++a) {
      table.at(s, a) = q[static_cast<std::size_t>(s) * na + a];
    }
  }
  table.meta.task = task.spec().name();
  table.meta.penalty = task.min_penalty();
  table.meta.discount = options.discount;
  table.meta.iterations = sweeps;
  table.meta.extra["source"] = "oracle";
  return table;
}

double bellman_residual(const Task& task, const WVFTable& table,
                        double discount) {
  const WorldSpec& world = task.world();
  double worst = 0.0;
  for (StateId s = 0; s < table.state_count(); ++s) {
    for (int gi = 0; gi < table.goal_count(); ++gi) {
      const StateId g = table.goal_state(gi);
      for (ActionId a = 0; a < table.action_count(); ++a) {
        const Transition& t = world.transition(s, a);
        double target = task.extended_reward(s, g, a, t.next, t.absorbing);
        if (!t.absorbing) target += discount * table.value(t.next, gi);
        worst = std::max(worst, std::abs(target - table.at(s, gi, a)));
      }
    }
  }
  return worst;
}

double bellman_residual(const Task& task, const QTable& table,
                        double discount) {
  const WorldSpec& world = task.world();
  double worst = 0.0;
  for (StateId s = 0; s < table.state_count(); ++s) {
    for (ActionId a = 0; a < table.action_count(); ++a) {
      const Transition& t = world.transition(s, a);
      double target = task.reward(s, a, t.next, t.absorbing);
      if (!t.absorbing) target += discount * table.value(t.next);
      worst = std::max(worst, std::abs(target - table.at(s, a)));
    }
  }
  return worst;
}

std::vector<StateId> reachable_states(const WorldSpec& world, StateId s) {
  if (!world.valid_state(s)) {
    throw DomainError("unknown state " + std::to_string(s));
  }
  std::vector<bool> seen(world.state_count(), false);
  std::deque<StateId> frontier{s};
  seen[s] = true;
  while (!frontier.empty()) {
    const StateId u = frontier.front();
    frontier.pop_front();
    for (ActionId a = 0; a < world.action_count(); ++a) {
      const Transition& t = world.transition(u, a);
      if (t.absorbing || seen[t.next]) continue;
      seen[t.next] = true;
      frontier.push_back(t.next);
    }
  }
  std::vector<StateId> out;
  for (StateId v = 0; v < world.state_count(); ++v) {
    if (seen[v]) out.push_back(v);
  }
  return out;
}

std::vector<StateId> reachable_goals(const WorldSpec& world, StateId s,
                                     const std::vector<StateId>& goals) {
  const auto states = reachable_states(world, s);
  std::vector<bool> reach(world.state_count(), false);
  for (StateId v : states) reach[v] = true;
  std::vector<StateId> out;
  for (StateId g : goals) {
    if (world.valid_state(g) && reach[g] && world.has_terminal_action(g)) {
      out.push_back(g);
    }
  }
  return out;
}

std::vector<StateId> reachable_goals(const WorldSpec& world, StateId s) {
  return reachable_goals(world, s, world.terminal_states());
}

}  // namespace wvf
