// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "wvf/harness.hpp"
#include "wvf/oracle.hpp"

using namespace wvf;
namespace fs = std::filesystem;

namespace {

const std::string kRoot = WVF_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

std::string num(double v) { return format_double(v); }

Environment canonical() {
  return build_environment(
      ExperimentConfig::load(kRoot + "/configs/four_rooms_exp1.cfg"));
}

Environment pickup_world() {
  return build_environment(
      ExperimentConfig::load(kRoot + "/configs/pickup_compose.cfg"));
}

WVFTable oracle_wvf(const Environment& env) {
  return vi_wvf(env.task(), env.world().terminal_states());
}

Outcome max_over_goals_recovery() {
  const Environment env = canonical();
  const WVFTable w = oracle_wvf(env);
  const QTable q = vi_task(env.task());
  const double err = max_abs_diff(recover_task(w).values(), q.values());
  return {err <= 1e-8, "max-norm error " + num(err)};
}

Outcome mastery() {
  const Environment env = canonical();
  const MasteryReport m = mastery_eval(oracle_wvf(env), env, 200);
  return {m.success_rate() == 1.0 && !m.outcomes.empty(),
          std::to_string(m.successes) + "/" +
              std::to_string(m.outcomes.size()) + " pairs"};
}

Outcome learned_quality() {
  const ExperimentConfig cfg =
      ExperimentConfig::load(kRoot + "/configs/four_rooms_exp1.cfg");
  const Environment env = build_environment(cfg);
  LearnConfig lc = cfg.learner;
  lc.seed = cfg.seeds.front();
  std::vector<bool> visited(env.world().state_count(), false);
  const LearnResult r =
      learn_wvf(env, lc, [&](const StepEvent& e) { visited[e.state] = true; });
  const QTable learned = recover_task(r.table);
  const QTable q = vi_task(env.task());
  double err = 0.0;
  std::size_t count = 0;
  for (StateId s = 0; s < q.state_count(); ++s) {
    if (!visited[s]) continue;
    ++count;
    for (ActionId a = 0; a < q.action_count(); ++a) {
      err = std::max(err, std::abs(learned.at(s, a) - q.at(s, a)));
    }
  }
  const double rate = mastery_eval(r.table, env, cfg.eval_horizon).success_rate();
  return {err <= 0.05 && rate >= 0.95 && count > 0,
          "max-norm " + num(err) + " over " + std::to_string(count) +
              " visited states, mastery " + num(rate)};
}

Outcome dynamics() {
  const ExperimentConfig cfg =
      ExperimentConfig::load(kRoot + "/configs/four_rooms_exp1.cfg");
  const Environment env = build_environment(cfg);
  const ModelAccuracy exact =
      model_accuracy(infer_model(oracle_wvf(env), env, {}), env.world());
  LearnConfig lc = cfg.learner;
  lc.seed = cfg.seeds.front();
  const WVFTable learned = learn_wvf(env, lc).table;
  const ModelAccuracy full =
      model_accuracy(infer_model(learned, env, {}), env.world());
  const ModelAccuracy local = model_accuracy(
      infer_model(learned, env, {cfg.infer_radius}), env.world());
  const bool pass = exact.correct == exact.total && exact.total > 0 &&
                    local.correct >= full.correct;
  return {pass, "oracle " + std::to_string(exact.correct) + "/" +
                    std::to_string(exact.total) + ", learned full " +
                    std::to_string(full.correct) + " vs radius " +
                    std::to_string(cfg.infer_radius) + " " +
                    std::to_string(local.correct)};
}

Outcome imagined() {
  const Environment env = canonical();
  const WVFTable w = oracle_wvf(env);
  const InferredModel m = infer_model(w, env, {});
  std::size_t pairs = 0;
  std::size_t same = 0;
  for (StateId s = 0; s < w.state_count(); ++s) {
    for (int gi = 0; gi < w.goal_count(); ++gi) {
      const StateId g = w.goal_state(gi);
      ++pairs;
      same += imagined_rollout(m, w, s, g, 200).states() ==
              real_rollout(env, w, s, g, 200).states();
    }
  }
  return {same == pairs && pairs > 0,
          std::to_string(same) + "/" + std::to_string(pairs) +
              " trajectories identical"};
}

Outcome zero_shot() {
  const Environment env = canonical();
  const GridWorld& grid = env.grid();
  const std::vector<NamedTask> named{{"goals", "goals"},
                                     {"hallways", "hallways"},
                                     {"bottom-row", "row:bottom"}};
  std::vector<Environment> envs;
  std::vector<WVFTable> wvfs;
  std::vector<QTable> qs;
  for (const NamedTask& t : named) {
    envs.push_back(env.with_task(build_task(grid, t)));
    wvfs.push_back(oracle_wvf(envs.back()));
    qs.push_back(vi_task(envs.back().task()));
  }
  double worst_value = 0.0;
  double worst_return = 0.0;
  for (std::size_t a = 0; a < named.size(); ++a) {
    for (std::size_t b = 0; b < named.size(); ++b) {
      if (a == b) continue;
      const TaskSpec& spec = envs[b].task().spec();
      const GoalValues v = zero_shot_values(wvfs[a], env.world(), spec);
      for (StateId s = 0; s < v.state_count(); ++s) {
        for (StateId g : reachable_goals(env.world(), s, v.goals())) {
          const int gi = *wvfs[b].goal_index(g);
          worst_value = std::max(
              worst_value, std::abs(v.at(s, gi) - wvfs[b].value(s, gi)));
        }
      }
      const Policy pi = zero_shot_policy(wvfs[a], v);
      for (StateId s = 0; s < v.state_count(); ++s) {
        const StateId start[] = {s};
        const double ret =
            evaluate_policy_from(envs[b], pi, start, 200).stats.mean_return;
        worst_return = std::max(worst_return, std::abs(ret - qs[b].value(s)));
      }
    }
  }
  return {worst_value <= 1e-8 && worst_return <= 1e-8,
          "value error " + num(worst_value) + ", return gap " +
              num(worst_return) + " over 6 ordered pairs"};
}

Outcome algebra() {
  const ExperimentConfig cfg =
      ExperimentConfig::load(kRoot + "/configs/pickup_compose.cfg");
  const Environment env = build_environment(cfg);
  const GridWorld& grid = env.grid();
  std::map<std::string, TaskSpec> specs;
  std::map<std::string, WVFTable> tables;
  for (const char* attr : {"blue", "square"}) {
    specs.emplace(attr, grid.task_from_attribute(attr, attr));
    tables.emplace(attr, oracle_wvf(env.with_task(specs.at(attr))));
  }
  const AlgebraContext ctx(oracle_wvf(env.with_task(grid.sup_task())),
                           oracle_wvf(env.with_task(grid.inf_task())));
  auto eval = [&](const std::string& e) {
    return compose(TaskExpression::parse(e), &ctx, tables);
  };
  auto task_of = [&](const std::string& e) {
    return compose_tasks(TaskExpression::parse(e), grid.sup_task(),
                         grid.inf_task(), specs, e);
  };

  double value_err = 0.0;
  double return_gap = 0.0;
  for (const std::string e :
       {"blue | square", "blue & square", "(blue | square) & ~(blue & square)"}) {
    const Environment target = env.with_task(task_of(e));
    const WVFTable composed = eval(e);
    value_err = std::max(value_err, max_abs_diff(composed.values(),
                                                 oracle_wvf(target).values()));
    const double got =
        evaluate_policy(target, greedy_policy(recover_task(composed)), 1000,
                        cfg.eval_horizon, 0)
            .stats.mean_return;
    const double opt =
        evaluate_policy(target, greedy_policy(vi_task(target.task())), 1000,
                        cfg.eval_horizon, 0)
            .stats.mean_return;
    return_gap = std::max(return_gap, std::abs(got - opt));
  }

  const std::vector<std::pair<std::string, std::string>> laws{
      {"~(blue | square)", "~blue & ~square"},
      {"~(blue & square)", "~blue | ~square"},
      {"~~blue", "blue"},
      {"~~square", "square"},
      {"blue | blue", "blue"},
      {"blue & blue", "blue"},
      {"blue | (blue & square)", "blue"},
      {"blue & (blue | square)", "blue"}};
  int broken = 0;
  for (const auto& [lhs, rhs] : laws) {
    broken += eval(lhs).values() != eval(rhs).values();
  }
  return {value_err <= 1e-8 && broken == 0 && return_gap <= 0.05,
          "value error " + num(value_err) + ", " + std::to_string(broken) +
              " broken laws, return gap " + num(return_gap)};
}

Outcome skill_count() {
  const Environment env = pickup_world();
  const GridWorld& grid = env.grid();
  std::map<std::string, TaskSpec> specs;
  std::map<std::string, WVFTable> tables;
  for (const char* attr : {"blue", "square"}) {
    specs.emplace(attr, grid.task_from_attribute(attr, attr));
    tables.emplace(attr, oracle_wvf(env.with_task(specs.at(attr))));
  }
  const AlgebraContext ctx(oracle_wvf(env.with_task(grid.sup_task())),
                           oracle_wvf(env.with_task(grid.inf_task())));
  const auto fns = enumerate_boolean_functions({"blue", "square"});
  std::set<std::vector<double>> distinct;
  double err = 0.0;
  for (const BooleanFunction& f : fns) {
    const WVFTable t = compose(f.expression, &ctx, tables);
    distinct.insert(t.values());
    const TaskSpec spec = compose_tasks(f.expression, grid.sup_task(),
                                        grid.inf_task(), specs, "f");
    err = std::max(err, max_abs_diff(t.values(),
                                     oracle_wvf(env.with_task(spec)).values()));
  }
  const bool pass = count_compositions(2) == 16 && fns.size() == 16 &&
                    distinct.size() == 16 && err <= 1e-8;
  return {pass, "count " + count_compositions(2).str() + ", " +
                    std::to_string(distinct.size()) +
                    " distinct WVFs, max error vs task oracles " + num(err)};
}

Outcome determinism() {
  const fs::path scratch = fs::temp_directory_path() / "wvf_acceptance";
  fs::remove_all(scratch);
  std::size_t compared = 0;
  std::vector<std::string> differing;
  for (const char* name :
       {"four_rooms_exp1.cfg", "zero_shot.cfg", "pickup_compose.cfg"}) {
    std::map<std::string, std::string> first;
    for (int run = 0; run < 2; ++run) {
      ExperimentConfig cfg =
          ExperimentConfig::load(kRoot + "/configs/" + std::string(name));
      cfg.output_dir = scratch / name / std::to_string(run);
      const RunReport r = run_experiment(cfg);
      if (r.failure) return {false, std::string(name) + ": " + *r.failure};
      for (const auto& e : fs::recursive_directory_iterator(cfg.output_dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string rel =
            fs::relative(e.path(), cfg.output_dir).generic_string();
        if (run == 0) {
          first[rel] = buf.str();
        } else {
          ++compared;
          if (!first.count(rel) || first[rel] != buf.str()) {
            differing.push_back(std::string(name) + ":" + rel);
          }
        }
      }
    }
  }
  fs::remove_all(scratch);
  return {differing.empty() && compared > 0,
          std::to_string(compared) + " files compared, " +
              std::to_string(differing.size()) + " differ"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "max over goals of oracle WVF equals task Q*", 10, max_over_goals_recovery},
      {2, "oracle WVF mastery", 30, mastery},
      {3, "learned WVF quality", 300, learned_quality},
      {4, "dynamics inference", 0, dynamics},
      {5, "imagined rollouts match real rollouts", 0, imagined},
      {6, "zero-shot transfer", 0, zero_shot},
      {7, "Boolean composition", 0, algebra},
      {8, "skill count", 0, skill_count},
      {9, "pipeline determinism", 0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
      o.pass = false;
      o.detail += ", over time limit";
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " ("
              << c.name << "): " << o.detail << " [" << timing << "]\n";
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
