#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "wvf/harness.hpp"
#include "wvf/oracle.hpp"

namespace fs = std::filesystem;
using namespace wvf;

namespace {

constexpr int kConfigError = 2;
constexpr int kStageError = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string table;
  std::vector<std::string> exprs;
  bool enumerate = false;
};

WVFTable obtain_table(const Options& opt, const ExperimentConfig& config,
                      const Environment& env, std::uint64_t seed) {
  if (!opt.table.empty()) return load_wvf_table(opt.table);
  if (config.source == "oracle") {
    return vi_wvf(env.task(), env.world().terminal_states());
  }
  LearnConfig learner = config.learner;
  learner.seed = seed;
  return learn_wvf(env, learner).table;
}

void report(const std::vector<fs::path>& files) {
  for (const fs::path& f : files) std::cout << f.string() << '\n';
}

int dispatch(const std::string& command, const Options& opt) {
  ExperimentConfig config;
  std::optional<Environment> env;
  try {
    config = ExperimentConfig::load(opt.config);
    if (opt.seed) config.seeds = {*opt.seed};
    if (!opt.out.empty()) config.output_dir = opt.out;
    if (opt.enumerate) config.compose_enumerate = true;
    env.emplace(build_environment(config));
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kConfigError;
  } catch (const LayoutError& err) {
    std::cerr << "config error: env.map: " << err.what() << '\n';
    return kConfigError;
  } catch (const DomainError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kConfigError;
  }

  const std::uint64_t seed = config.seeds.front();
  const fs::path dir = config.output_dir;
  try {
    if (command == "run") {
      const RunReport r = run_experiment(config);
      report(r.files);
      if (r.failure) {
        std::cerr << "stage failure: " << *r.failure << '\n';
        return kStageError;
      }
      return 0;
    }
    if (command == "oracle") {
      report(stage_oracle(config, *env, dir));
    } else if (command == "learn") {
      report(stage_learn(config, *env, seed, dir));
    } else if (command == "compose") {
      report(stage_compose(config, *env, seed, dir, opt.exprs));
    } else {
      const WVFTable table = obtain_table(opt, config, *env, seed);
      if (command == "eval") {
        report(stage_eval(config, *env, table, seed, dir));
      } else if (command == "render") {
        report(stage_render(config, *env, table, dir));
      } else if (command == "infer-dynamics") {
        report(stage_infer(config, *env, table, dir));
      } else if (command == "zero-shot") {
        report(stage_zero_shot(config, *env, table, seed, dir));
      }
    }
  } catch (const std::exception& err) {
    std::cerr << "stage failure: " << command << ": " << err.what() << '\n';
    return kStageError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"World value functions on tabular grid worlds"};
  app.require_subcommand(1);
  Options opt;

  auto add = [&](const std::string& name, const std::string& help,
                 bool table) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "experiment config file")
        ->required();
    sub->add_option("--seed", opt.seed, "override run.seeds");
    sub->add_option("--out", opt.out, "output directory");
    if (table) sub->add_option("--table", opt.table, "saved WVF table");
    return sub;
  };
  add("run", "run every configured stage", false);
  add("oracle", "exact WVF and task values by value iteration", false);
  add("learn", "learn a WVF with goal-conditioned Q-learning", false);
  add("eval", "evaluate the task policy recovered from a WVF", true);
  add("render", "heatmaps of a WVF", true);
  add("infer-dynamics", "infer transitions from a WVF", true);
  add("zero-shot", "transfer a WVF to new terminal rewards", true);
  CLI::App* compose = add("compose", "compose base-task WVFs", false);
  compose->add_option("--expr", opt.exprs, "boolean task expression");
  compose->add_flag("--enumerate", opt.enumerate,
                    "enumerate every Boolean function of the base tasks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : kConfigError;
  }
  return dispatch(app.get_subcommands().front()->get_name(), opt);
}
