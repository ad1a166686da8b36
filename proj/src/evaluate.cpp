#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "wvf/harness.hpp"

namespace wvf {

namespace {

double best_terminal_reward(const Environment& env) {
  const WorldSpec& world = env.world();
  double best = -std::numeric_limits<double>::infinity();
  for (StateId s = 0; s < world.state_count(); ++s) {
    if (auto r = env.task().spec().max_terminal_reward(world, s)) {
      best = std::max(best, *r);
    }
  }
  return best;
}

EpisodeRecord run_episode(const Environment& env, const Policy& policy,
                          StateId start, int horizon, double success_reward) {
  if (policy.size() != static_cast<std::size_t>(env.world().state_count())) {
    throw DomainError("policy does not cover every state");
  }
  EpisodeRecord rec;
  rec.start = start;
  EnvState state{start, false};
  while (rec.steps < horizon && !state.terminated) {
    const StepResult step = env.step(state, policy[state.agent]);
    rec.episode_return += step.reward;
    ++rec.steps;
    if (step.absorbing) rec.success = step.reward == success_reward;
    state = step.next;
  }
  rec.truncated = !state.terminated;
  return rec;
}

}  // namespace

EvalStats summarize(const std::vector<EpisodeRecord>& episodes) {
  EvalStats stats;
  stats.episodes = static_cast<long>(episodes.size());
  if (episodes.empty()) return stats;
  double sum = 0.0;
  long successes = 0;
  for (const EpisodeRecord& e : episodes) {
    sum += e.episode_return;
    successes += e.success;
    stats.truncated += e.truncated;
  }
  const double n = static_cast<double>(episodes.size());
  stats.mean_return = sum / n;
  double var = 0.0;
  for (const EpisodeRecord& e : episodes) {
    const double d = e.episode_return - stats.mean_return;
    var += d * d;
  }
  stats.stddev = std::sqrt(var / n);
  stats.success_rate = successes / n;
  return stats;
}

EvalResult evaluate_policy(const Environment& env, const Policy& policy,
                           long episodes, int horizon, std::uint64_t seed) {
  if (episodes < 1) throw DomainError("evaluation needs at least one episode");
  const double success_reward = best_terminal_reward(env);
  std::mt19937_64 rng(seed);
  EvalResult out;
  out.episodes.reserve(static_cast<std::size_t>(episodes));
  for (long ep = 0; ep < episodes; ++ep) {
    const StateId start = env.sample_start(rng).agent;
    EpisodeRecord rec = run_episode(env, policy, start, horizon, success_reward);
    rec.episode = ep;
    out.episodes.push_back(rec);
  }
  out.stats = summarize(out.episodes);
  return out;
}

EvalResult evaluate_policy_from(const Environment& env, const Policy& policy,
                                std::span<const StateId> starts, int horizon) {
  if (starts.empty()) throw DomainError("evaluation needs at least one start");
  const double success_reward = best_terminal_reward(env);
  EvalResult out;
  long ep = 0;
  for (StateId start : starts) {
    EpisodeRecord rec = run_episode(env, policy, start, horizon, success_reward);
    rec.episode = ep++;
    out.episodes.push_back(rec);
  }
  out.stats = summarize(out.episodes);
  return out;
}

void write_episode_csv(std::ostream& out,
                       const std::vector<EpisodeRecord>& episodes) {
  out << "episode,start,return,steps,truncated,success\n";
  for (const EpisodeRecord& e : episodes) {
    out << e.episode << ',' << e.start << ',' << format_double(e.episode_return)
        << ',' << e.steps << ',' << e.truncated << ',' << e.success << '\n';
  }
}

void write_stats_header(std::ostream& out) {
  out << "label,mean_return,stddev,episodes,success_rate,truncated\n";
}

void write_stats_row(std::ostream& out, const std::string& label,
                     const EvalStats& stats) {
  out << label << ',' << format_double(stats.mean_return) << ','
      << format_double(stats.stddev) << ',' << stats.episodes << ','
      << format_double(stats.success_rate) << ',' << stats.truncated << '\n';
}

}  // namespace wvf
