#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "wvf/dynamics.hpp"
#include "wvf/harness.hpp"
#include "wvf/oracle.hpp"

namespace wvf {

namespace fs = std::filesystem;

namespace {

using Files = std::vector<fs::path>;

fs::path write_file(const fs::path& path,
                    const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot write '" + path.string() + "'");
  body(out);
  out.flush();
  if (!out) throw StageError("failed writing '" + path.string() + "'");
  return path;
}

std::string file_label(std::string name) {
  for (char& c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      c = '_';
    }
  }
  return name;
}

std::vector<double> state_values(const QTable& q) {
  std::vector<double> v(q.state_count());
  for (StateId s = 0; s < q.state_count(); ++s) v[s] = q.value(s);
  return v;
}

WVFTable oracle_table(const Environment& env, const TaskSpec& spec) {
  Task task(env.grid().world(), spec, env.task().min_penalty());
  return vi_wvf(task, env.world().terminal_states());
}

// Re-indexes a learned table onto `goals`; every goal must be present.
WVFTable align_goals(const WVFTable& table, const std::vector<StateId>& goals) {
  WVFTable out(table.state_count(), goals, table.action_count());
  for (int gi = 0; gi < out.goal_count(); ++gi) {
    const auto src = table.goal_index(goals[gi]);
    if (!src) {
      throw StageError("learned table for '" + table.meta.task +
                       "' never reached goal state " +
                       std::to_string(goals[gi]));
    }
    for (StateId s = 0; s < table.state_count(); ++s) {
      for (ActionId a = 0; a < table.action_count(); ++a) {
        out.at(s, gi, a) = table.at(s, *src, a);
      }
    }
  }
  out.meta = table.meta;
  return out;
}

WVFTable table_for(const ExperimentConfig& config, const Environment& env,
                   const TaskSpec& spec, std::uint64_t seed) {
  if (config.source == "oracle") return oracle_table(env, spec);
  LearnConfig learner = config.learner;
  learner.seed = seed;
  LearnResult learned = learn_wvf(env.with_task(spec), learner);
  return align_goals(learned.table, env.world().terminal_states());
}

LearnResult learn(const ExperimentConfig& config, const Environment& env,
                  std::uint64_t seed, const fs::path& dir, Files& files) {
  LearnConfig learner = config.learner;
  learner.seed = seed;
  LearnResult result = learn_wvf(env, learner);
  files.push_back(write_file(dir / "table.wvf", [&](std::ostream& out) {
    write_table(out, result.table);
  }));
  files.push_back(write_file(dir / "curve.csv", [&](std::ostream& out) {
    write_learning_curve(out, result.curve);
  }));
  return result;
}

WVFTable oracle(const Environment& env, const fs::path& dir, Files& files) {
  WVFTable table = vi_wvf(env.task(), env.world().terminal_states());
  QTable q = vi_task(env.task());
  files.push_back(write_file(dir / "oracle.wvf", [&](std::ostream& out) {
    write_table(out, table);
  }));
  files.push_back(write_file(dir / "oracle_task.q", [&](std::ostream& out) {
    write_table(out, q);
  }));
  return table;
}

std::vector<StateId> probe_states(const ExperimentConfig& config,
                                  const GridWorld& grid) {
  std::vector<StateId> out;
  for (const Cell& c : config.infer_probe) {
    const auto s = grid.state_of(c);
    if (!s) throw StageError("infer.probe cell " + to_string(c) + " is a wall");
    out.push_back(*s);
  }
  return out;
}

}  // namespace

Files stage_oracle(const ExperimentConfig&, const Environment& env,
                   const fs::path& dir) {
  Files files;
  oracle(env, dir, files);
  return files;
}

Files stage_learn(const ExperimentConfig& config, const Environment& env,
                  std::uint64_t seed, const fs::path& dir) {
  Files files;
  learn(config, env, seed, dir, files);
  return files;
}

Files stage_eval(const ExperimentConfig& config, const Environment& env,
                 const WVFTable& table, std::uint64_t seed,
                 const fs::path& dir) {
  Files files;
  const Policy policy = greedy_policy(recover_task(table));
  const EvalResult eval = evaluate_policy(env, policy, config.eval_episodes,
                                          config.eval_horizon, seed);
  files.push_back(write_file(dir / "eval_episodes.csv", [&](std::ostream& out) {
    write_episode_csv(out, eval.episodes);
  }));
  files.push_back(write_file(dir / "eval_summary.csv", [&](std::ostream& out) {
    write_stats_header(out);
    write_stats_row(out, env.task().spec().name(), eval.stats);
  }));
  const MasteryReport mastery = mastery_eval(table, env, config.eval_horizon);
  files.push_back(write_file(dir / "mastery.csv", [&](std::ostream& out) {
    out << "pairs,successes,excluded,success_rate\n"
        << mastery.outcomes.size() << ',' << mastery.successes << ','
        << mastery.excluded_pairs << ','
        << format_double(mastery.success_rate()) << '\n';
  }));
  return files;
}

Files stage_render(const ExperimentConfig&, const Environment& env,
                   const WVFTable& table, const fs::path& dir) {
  Files files;
  files.push_back(write_file(dir / "wvf_goals.svg", [&](std::ostream& out) {
    render_goal_tiled(out, env.grid(), table);
  }));
  const auto values = state_values(recover_task(table));
  files.push_back(write_file(dir / "task_values.svg", [&](std::ostream& out) {
    render_heatmap(out, env.grid(), values);
  }));
  return files;
}

Files stage_infer(const ExperimentConfig& config, const Environment& env,
                  const WVFTable& table, const fs::path& dir) {
  Files files;
  const WorldSpec& truth = env.world();
  const InferredModel full = infer_model(table, env, {});
  const InferredModel local = infer_model(table, env, {config.infer_radius});
  files.push_back(write_file(dir / "model_full.csv", [&](std::ostream& out) {
    write_model_csv(out, full, &truth);
  }));
  files.push_back(
      write_file(dir / "model_neighbourhood.csv", [&](std::ostream& out) {
        write_model_csv(out, local, &truth);
      }));
  files.push_back(write_file(dir / "infer_summary.csv", [&](std::ostream& out) {
    out << "scope,correct,total,accuracy\n";
    const ModelAccuracy a = model_accuracy(full, truth);
    const ModelAccuracy b = model_accuracy(local, truth);
    out << "full," << a.correct << ',' << a.total << ','
        << format_double(a.rate()) << '\n';
    out << "radius_" << config.infer_radius << ',' << b.correct << ','
        << b.total << ',' << format_double(b.rate()) << '\n';
  }));
  const auto probes = probe_states(config, env.grid());
  if (!probes.empty()) {
    files.push_back(
        write_file(dir / "transitions_full.svg", [&](std::ostream& out) {
          render_transitions(out, env.grid(), full, probes);
        }));
    files.push_back(write_file(
        dir / "transitions_neighbourhood.svg", [&](std::ostream& out) {
          render_transitions(out, env.grid(), local, probes);
        }));
    files.push_back(write_file(dir / "imagined.csv", [&](std::ostream& out) {
      out << "start,step,state,action,value,normalized,terminated,truncated\n";
      for (StateId start : probes) {
        const Trajectory traj =
            imagined_rollout(local, table, start, std::nullopt,
                             config.eval_horizon);
        for (std::size_t k = 0; k < traj.steps.size(); ++k) {
          const ImaginedStep& st = traj.steps[k];
          out << start << ',' << k << ',' << st.state << ',' << st.action
              << ',' << format_double(st.value) << ','
              << format_double(st.normalized) << ',' << traj.terminated << ','
              << traj.truncated << '\n';
        }
      }
    }));
  }
  return files;
}

Files stage_zero_shot(const ExperimentConfig& config, const Environment& env,
                      const WVFTable& table, std::uint64_t seed,
                      const fs::path& dir) {
  Files files;
  std::ostringstream stats;
  write_stats_header(stats);
  for (const NamedTask& named : config.zero_shot_tasks) {
    const TaskSpec spec = build_task(env.grid(), named);
    const Environment target = env.with_task(spec);
    const GoalValues estimate = zero_shot_values(table, env.world(), spec);
    const Policy policy = zero_shot_policy(table, estimate);
    const EvalResult zs = evaluate_policy(target, policy, config.eval_episodes,
                                          config.eval_horizon, seed);
    const Policy best = greedy_policy(vi_task(target.task()));
    const EvalResult opt = evaluate_policy(target, best, config.eval_episodes,
                                           config.eval_horizon, seed);
    write_stats_row(stats, named.name, zs.stats);
    write_stats_row(stats, named.name + " [oracle]", opt.stats);
    std::vector<double> values(estimate.state_count());
    for (StateId s = 0; s < estimate.state_count(); ++s) {
      values[s] = estimate.value(s);
    }
    files.push_back(write_file(
        dir / ("zero_shot_" + file_label(named.name) + ".svg"),
        [&](std::ostream& out) { render_heatmap(out, env.grid(), values); }));
  }
  files.push_back(write_file(dir / "zero_shot.csv", [&](std::ostream& out) {
    out << stats.str();
  }));
  return files;
}

Files stage_compose(const ExperimentConfig& config, const Environment& env,
                    std::uint64_t seed, const fs::path& dir,
                    const std::vector<std::string>& exprs_override) {
  if (config.compose_tasks.empty()) {
    throw StageError("compose.tasks is empty");
  }
  Files files;
  const GridWorld& grid = env.grid();
  const TaskSpec sup = grid.sup_task();
  const TaskSpec inf = grid.inf_task();
  const AlgebraContext context(table_for(config, env, sup, seed),
                               table_for(config, env, inf, seed));
  std::map<std::string, TaskSpec> specs;
  std::map<std::string, WVFTable> tables;
  std::vector<std::string> bases;
  for (const NamedTask& named : config.compose_tasks) {
    TaskSpec spec = build_task(grid, named);
    tables.emplace(named.name, table_for(config, env, spec, seed));
    specs.emplace(named.name, std::move(spec));
    bases.push_back(named.name);
  }

  const auto& exprs =
      exprs_override.empty() ? config.compose_exprs : exprs_override;
  std::ostringstream stats;
  write_stats_header(stats);
  int index = 0;
  for (const std::string& text : exprs) {
    const TaskExpression expr = TaskExpression::parse(text);
    const WVFTable composed = compose(expr, &context, tables);
    const TaskSpec spec = compose_tasks(expr, sup, inf, specs, text);
    const Environment target = env.with_task(spec);
    const EvalResult got =
        evaluate_policy(target, greedy_policy(recover_task(composed)),
                        config.eval_episodes, config.eval_horizon, seed);
    const EvalResult opt =
        evaluate_policy(target, greedy_policy(vi_task(target.task())),
                        config.eval_episodes, config.eval_horizon, seed);
    write_stats_row(stats, text, got.stats);
    write_stats_row(stats, text + " [oracle]", opt.stats);
    const auto values = state_values(recover_task(composed));
    files.push_back(write_file(
        dir / ("compose_" + std::to_string(index++) + ".svg"),
        [&](std::ostream& out) { render_heatmap(out, grid, values); }));
  }
  files.push_back(write_file(dir / "compose_stats.csv", [&](std::ostream& out) {
    out << stats.str();
  }));

  if (config.compose_enumerate) {
    const auto functions = enumerate_boolean_functions(bases);
    std::vector<WVFTable> seen;
    files.push_back(write_file(dir / "skills.csv", [&](std::ostream& out) {
      out << "index,truth_table,expression,class,max_error_vs_oracle\n";
      for (std::size_t i = 0; i < functions.size(); ++i) {
        const WVFTable composed =
            compose(functions[i].expression, &context, tables);
        const TaskSpec spec = compose_tasks(functions[i].expression, sup, inf,
                                            specs, "f" + std::to_string(i));
        const WVFTable direct = oracle_table(env, spec);
        double err = 0.0;
        for (std::size_t k = 0; k < direct.values().size(); ++k) {
          err = std::max(err,
                         std::abs(direct.values()[k] - composed.values()[k]));
        }
        std::size_t cls = seen.size();
        for (std::size_t j = 0; j < seen.size(); ++j) {
          bool equal = true;
          for (std::size_t k = 0; k < composed.values().size() && equal; ++k) {
            equal = std::abs(seen[j].values()[k] - composed.values()[k]) <= 1e-8;
          }
          if (equal) {
            cls = j;
            break;
          }
        }
        if (cls == seen.size()) seen.push_back(composed);
        out << i << ',' << functions[i].truth_table << ','
            << functions[i].expression.to_string() << ',' << cls << ','
            << format_double(err) << '\n';
      }
    }));
  }
  return files;
}

RunReport run_experiment(const ExperimentConfig& config) {
  RunReport report;
  const fs::path root = config.output_dir;
  fs::create_directories(root);
  std::string current = "setup";
  try {
    const Environment env = build_environment(config);
    for (std::uint64_t seed : config.seeds) {
      const fs::path dir = root / ("seed_" + std::to_string(seed));
      auto run = [&](const std::string& stage, auto&& body) {
        current = "seed " + std::to_string(seed) + ", stage " + stage;
        body();
      };
      std::optional<WVFTable> learned;
      std::optional<WVFTable> exact;
      if (config.has_stage("oracle") || config.source == "oracle") {
        run("oracle", [&] { exact = oracle(env, dir, report.files); });
      }
      if (config.has_stage("learn")) {
        run("learn", [&] {
          learned = learn(config, env, seed, dir, report.files).table;
        });
      }
      const WVFTable* table = config.source == "oracle"
                                  ? (exact ? &*exact : nullptr)
                                  : (learned ? &*learned : nullptr);
      const bool needs_table = config.has_stage("eval") ||
                               config.has_stage("render") ||
                               config.has_stage("infer") ||
                               config.has_stage("zero-shot");
      if (needs_table && !table) {
        current = "seed " + std::to_string(seed) + ", setup";
        throw StageError("run.source = learned requires the learn stage");
      }
      auto append = [&](Files f) {
        report.files.insert(report.files.end(), f.begin(), f.end());
      };
      if (config.has_stage("eval")) {
        run("eval", [&] { append(stage_eval(config, env, *table, seed, dir)); });
      }
      if (config.has_stage("render")) {
        run("render", [&] { append(stage_render(config, env, *table, dir)); });
      }
      if (config.has_stage("infer")) {
        run("infer", [&] { append(stage_infer(config, env, *table, dir)); });
      }
      if (config.has_stage("zero-shot")) {
        run("zero-shot",
            [&] { append(stage_zero_shot(config, env, *table, seed, dir)); });
      }
      if (config.has_stage("compose")) {
        run("compose", [&] { append(stage_compose(config, env, seed, dir)); });
      }
    }
  } catch (const std::exception& err) {
    report.failure = current + ": " + err.what();
  }

  std::vector<std::pair<std::string, std::string>> entries;
  for (const fs::path& f : report.files) {
    entries.emplace_back(fs::relative(f, root).generic_string(),
                         file_sha256(f));
  }
  std::sort(entries.begin(), entries.end());
  std::ofstream manifest(root / "manifest.txt", std::ios::binary);
  manifest << "WVFRUN 1\n"
           << "config_sha256=" << config.config_hash << '\n'
           << "seeds=";
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    manifest << (i ? "," : "") << config.seeds[i];
  }
  manifest << "\nstages=";
  for (std::size_t i = 0; i < config.stages.size(); ++i) {
    manifest << (i ? "," : "") << config.stages[i];
  }
  manifest << "\nstatus=" << (report.failure ? "failed" : "ok") << '\n';
  if (report.failure) manifest << "failure=" << *report.failure << '\n';
  for (const auto& [path, hash] : entries) {
    manifest << "file " << hash << ' ' << path << '\n';
  }
  return report;
}

RunReport run_experiment(const fs::path& config_path) {
  return run_experiment(ExperimentConfig::load(config_path));
}

}  // namespace wvf
