#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <regex>

#include "support.hpp"
#include "wvf/harness.hpp"
#include "wvf/oracle.hpp"

using namespace wvf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "wvf_harness_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path p = dir / "exp.cfg";
  std::ofstream(p) << body;
  return p;
}

std::string four_rooms_config(const fs::path& out, long episodes) {
  return "env.kind = four_rooms\n"
         "env.map = " + test::data_path("maps/four_rooms.map") + "\n"
         "env.task = goals\n"
         "learner.episodes = " + std::to_string(episodes) + "\n"
         "eval.episodes = 200\n"
         "output.dir = " + out.string() + "\n"
         "run.seeds = 1,2\n"
         "run.stages = oracle,learn,eval,render,infer,zero-shot\n"
         "infer.probe = 3,3; 9,9\n"
         "zero_shot.tasks = hall=hallways; bottom=row:bottom\n";
}

std::string compose_config(const fs::path& out) {
  return "env.kind = pickup\n"
         "env.map = " + test::data_path("maps/pickup.map") + "\n"
         "env.task = attr:any\n"
         "output.dir = " + out.string() + "\n"
         "run.stages = compose\n"
         "run.source = oracle\n"
         "compose.tasks = blue=attr:blue; square=attr:square\n"
         "compose.exprs = blue | square; blue & square; "
         "(blue | square) & ~(blue & square)\n";
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), root).generic_string()] =
          test::read_text(e.path().string());
    }
  }
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(WVF_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(ConfigTest, ParsesKeysAndComments) {
  const Config c = Config::parse(
      "# comment\n\nenv.kind = pickup \n eval.episodes=5\nrun.flag = yes\n");
  EXPECT_EQ(c.get_string("env.kind", ""), "pickup");
  EXPECT_EQ(c.get_long("eval.episodes", 0), 5);
  EXPECT_TRUE(c.get_bool("run.flag", false));
  EXPECT_EQ(c.get_double("reward.step", -0.5), -0.5);
  EXPECT_FALSE(c.has("env.map"));
}

TEST(ConfigTest, Errors) {
  EXPECT_THROW(Config::parse("env.kind = a\nenv.kind = b\n"), ConfigError);
  EXPECT_THROW(Config::parse("just text\n"), ConfigError);
  EXPECT_THROW(Config::parse("nosection = 1\n"), ConfigError);
  const Config c = Config::parse("eval.episodes = ten\nreward.step = x\n");
  try {
    c.get_long("eval.episodes", 0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("eval.episodes"), std::string::npos);
  }
  EXPECT_THROW(c.get_double("reward.step", 0), ConfigError);
  EXPECT_THROW(c.require("env.map"), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/exp.cfg"), ConfigError);
}

TEST(ExperimentConfigTest, MissingMapNamesThePath) {
  const Config c = Config::parse("env.map = /nonexistent/rooms.map\n");
  try {
    ExperimentConfig::from(c);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("env.map"), std::string::npos) << msg;
    EXPECT_NE(msg.find("/nonexistent/rooms.map"), std::string::npos) << msg;
  }
}

TEST(ExperimentConfigTest, RangeChecks) {
  const std::string map = "env.map = " + test::data_path("maps/four_rooms.map");
  auto load = [&](const std::string& extra) {
    return ExperimentConfig::from(Config::parse(map + "\n" + extra));
  };
  EXPECT_NO_THROW(load(""));
  EXPECT_THROW(load("run.stages = learn,dance"), ConfigError);
  EXPECT_THROW(load("run.seeds = ,"), ConfigError);
  EXPECT_THROW(load("learner.alpha = 2"), ConfigError);
  EXPECT_THROW(load("learner.epsilon = -1"), ConfigError);
  EXPECT_THROW(load("eval.episodes = 0"), ConfigError);
  EXPECT_THROW(load("env.kind = maze"), ConfigError);
  EXPECT_THROW(load("run.source = guess"), ConfigError);
  EXPECT_THROW(load("infer.probe = 1"), ConfigError);
  EXPECT_THROW(load("zero_shot.tasks = hallways"), ConfigError);
  const ExperimentConfig e = load("run.seeds = 3, 5\nreward.penalty = -500");
  EXPECT_EQ(e.seeds, (std::vector<std::uint64_t>{3, 5}));
  EXPECT_EQ(e.penalty, -500.0);
  EXPECT_EQ(e.config_hash.size(), 64u);
}

TEST(BuildTask, Definitions) {
  const Environment env = test::four_rooms();
  const GridWorld& g = env.grid();
  const TaskSpec bottom = build_task(g, {"b", "row:bottom"});
  for (StateId s = 0; s < g.state_count(); ++s) {
    EXPECT_EQ(bottom.terminal_reward(s, Terminate),
              g.cell_of(s).y == 11 ? 2.0 : -0.1);
  }
  const TaskSpec cells = build_task(g, {"c", "cells:1,1;2,1"});
  EXPECT_EQ(cells.terminal_reward(*g.state_of({2, 1}), Terminate), 2.0);
  EXPECT_EQ(cells.terminal_reward(*g.state_of({3, 1}), Terminate), -0.1);
  EXPECT_THROW(build_task(g, {"x", "teleport"}), ConfigError);
  EXPECT_THROW(build_task(g, {"x", "row:0"}), ConfigError);
  EXPECT_THROW(build_task(g, {"x", "cells:0,0"}), LayoutError);
}

TEST(Evaluate, AdjacentStartIsDeterministic) {
  const Environment env = test::four_rooms();
  const Policy pi = greedy_policy(vi_task(env.task()));
  const StateId start[] = {*env.grid().state_of({3, 4})};
  const EvalResult r = evaluate_policy_from(env, pi, start, 50);
  EXPECT_NEAR(r.stats.mean_return, 1.9, 1e-12);
  EXPECT_EQ(r.stats.stddev, 0.0);
  EXPECT_EQ(r.stats.success_rate, 1.0);
}

TEST(Evaluate, UniformStartsMatchDistanceOracle) {
  const Environment env = test::four_rooms();
  const GridWorld& g = env.grid();
  const Policy pi = greedy_policy(vi_task(env.task()));
  const auto dist = test::bfs_distances(g, g.layout().goals);

  std::vector<StateId> every(g.state_count());
  for (StateId s = 0; s < g.state_count(); ++s) every[s] = s;
  double expected = 0.0;
  for (StateId s : every) expected += 2.0 - 0.1 * dist[s];
  expected /= every.size();
  EXPECT_NEAR(evaluate_policy_from(env, pi, every, 100).stats.mean_return,
              expected, 1e-9);

  const EvalResult r = evaluate_policy(env, pi, 1000, 100, 42);
  double sampled = 0.0;
  for (const EpisodeRecord& e : r.episodes) {
    EXPECT_NEAR(e.episode_return, 2.0 - 0.1 * dist[e.start], 1e-9);
    sampled += 2.0 - 0.1 * dist[e.start];
  }
  EXPECT_NEAR(r.stats.mean_return, sampled / 1000, 1e-9);
  EXPECT_EQ(r.stats.episodes, 1000);
  EXPECT_EQ(r.stats.truncated, 0);
}

TEST(Evaluate, TruncationIsCounted) {
  const Environment env = test::four_rooms();
  const Policy north(env.world().state_count(), North);
  const EvalResult r = evaluate_policy(env, north, 20, 5, 0);
  EXPECT_EQ(r.stats.truncated, 20);
  EXPECT_EQ(r.stats.success_rate, 0.0);
  EXPECT_NEAR(r.stats.mean_return, -0.5, 1e-12);
  EXPECT_THROW(evaluate_policy(env, north, 0, 5, 0), DomainError);
}

TEST(Evaluate, MeanRecomputedFromCsvIsExact) {
  const Environment env = test::four_rooms();
  const Policy pi = greedy_policy(vi_task(env.task()));
  const EvalResult r = evaluate_policy(env, pi, 333, 100, 9);
  std::ostringstream csv;
  write_episode_csv(csv, r.episodes);
  const auto rows = lines(csv.str());
  ASSERT_EQ(rows.front(), "episode,start,return,steps,truncated,success");
  double sum = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    sum += parse_double(fields(rows[i])[2]);
  }
  const double mean = sum / (rows.size() - 1);
  EXPECT_EQ(std::memcmp(&mean, &r.stats.mean_return, sizeof mean), 0);
}

TEST(Render, ColourScaleEnds) {
  EXPECT_EQ(diverging_colour(0.0), "#3b4cc0");
  EXPECT_EQ(diverging_colour(0.5), "#f7f7f7");
  EXPECT_EQ(diverging_colour(1.0), "#b40426");
  EXPECT_EQ(diverging_colour(7.0), "#b40426");
}

TEST(Render, ConstantMapIsMidScale) {
  const Environment env = test::four_rooms();
  const std::vector<double> v(104, 3.0);
  std::ostringstream out;
  render_heatmap(out, env.grid(), v);
  const std::string svg = out.str();
  std::regex t("data-t=\"([^\"]+)\"");
  int n = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), t);
       it != std::sregex_iterator(); ++it, ++n) {
    EXPECT_EQ((*it)[1], "0.5");
  }
  EXPECT_EQ(n, 104);
  std::ostringstream again;
  render_heatmap(again, env.grid(), v);
  EXPECT_EQ(again.str(), svg);
  const std::vector<double> short_values(50, 1.0);
  EXPECT_THROW(render_heatmap(out, env.grid(), short_values), DomainError);
}

TEST(Render, TaskValuesRiseTowardGoals) {
  const Environment env = test::four_rooms();
  const GridWorld& g = env.grid();
  const QTable q = vi_task(env.task());
  std::vector<double> v(104);
  for (StateId s = 0; s < 104; ++s) v[s] = q.value(s);
  std::ostringstream out;
  render_heatmap(out, g, v);
  const std::string svg = out.str();
  std::regex rx("data-state=\"(\\d+)\" data-t=\"([^\"]+)\"");
  std::vector<double> t(104, -1);
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), rx);
       it != std::sregex_iterator(); ++it) {
    t[std::stoi((*it)[1])] = parse_double((*it)[2]);
  }
  const auto dist = test::bfs_distances(g, g.layout().goals);
  for (StateId s = 0; s < 104; ++s) {
    if (dist[s] == 0) {
      EXPECT_EQ(t[s], 1.0);
      continue;
    }
    bool rises = false;
    for (StateId n : g.neighbourhood(s, 1)) {
      if (dist[n] == dist[s] - 1 && t[n] > t[s]) rises = true;
    }
    EXPECT_TRUE(rises) << s;
  }
}

TEST(Render, GoalTilesAreHotAtTaskGoals) {
  const Environment env = test::four_rooms();
  const GridWorld& g = env.grid();
  const WVFTable w = vi_wvf(env.task(), env.world().terminal_states());
  std::ostringstream out;
  render_goal_tiled(out, g, w);
  const std::string svg = out.str();
  for (const Cell& c : g.layout().goals) {
    const StateId s = *g.state_of(c);
    const std::string open = "<g data-goal=\"" + std::to_string(s) + "\">";
    const auto begin = svg.find(open);
    ASSERT_NE(begin, std::string::npos);
    const std::string tile = svg.substr(begin, svg.find("</g>", begin) - begin);
    // The goal's own cell inside its tile holds the global maximum.
    const int x = c.x * 13 * 3 + c.x * 3;
    const int y = c.y * 13 * 3 + c.y * 3;
    const std::string cell = "<rect x=\"" + std::to_string(x) + "\" y=\"" +
                             std::to_string(y) + "\" width=\"3\" height=\"3\" "
                             "fill=\"#b40426\"/>";
    EXPECT_NE(tile.find(cell), std::string::npos);
  }
  std::size_t tiles = 0;
  for (auto p = svg.find("<g data-goal"); p != std::string::npos;
       p = svg.find("<g data-goal", p + 1)) {
    ++tiles;
  }
  EXPECT_EQ(tiles, 104u);
}

TEST(Pipeline, FourRoomsOutputsAreCompleteAndDeterministic) {
  const fs::path root = scratch("pipeline");
  const fs::path a = root / "a";
  const fs::path b = root / "b";
  const RunReport ra =
      run_experiment(write_config(root, four_rooms_config(a, 2000)));
  ASSERT_FALSE(ra.failure) << *ra.failure;
  fs::remove(root / "exp.cfg");
  const RunReport rb =
      run_experiment(write_config(root, four_rooms_config(b, 2000)));
  ASSERT_FALSE(rb.failure) << *rb.failure;

  const auto ta = tree(a);
  const auto tb = tree(b);
  ASSERT_EQ(ta.size(), tb.size());
  for (const auto& [path, bytes] : ta) {
    if (path == "manifest.txt") continue;
    EXPECT_EQ(bytes, tb.at(path)) << path;
  }
  for (const char* f :
       {"seed_1/table.wvf", "seed_1/curve.csv", "seed_1/wvf_goals.svg",
        "seed_1/task_values.svg", "seed_1/eval_summary.csv",
        "seed_1/mastery.csv", "seed_1/infer_summary.csv",
        "seed_1/transitions_neighbourhood.svg", "seed_1/imagined.csv",
        "seed_1/zero_shot.csv", "seed_2/table.wvf"}) {
    EXPECT_TRUE(ta.count(f)) << f;
  }
  EXPECT_NE(ta.at("seed_1/table.wvf"), ta.at("seed_2/table.wvf"));

  // Manifest: every emitted file with its hash, plus config hash and seeds.
  const auto manifest = lines(ta.at("manifest.txt"));
  EXPECT_EQ(manifest[0], "WVFRUN 1");
  EXPECT_EQ(manifest[2], "seeds=1,2");
  EXPECT_EQ(manifest[4], "status=ok");
  std::size_t listed = 0;
  for (const std::string& l : manifest) {
    if (l.rfind("file ", 0) != 0) continue;
    const std::string hash = l.substr(5, 64);
    const std::string rel = l.substr(70);
    EXPECT_EQ(file_sha256(a / rel), hash) << rel;
    ++listed;
  }
  EXPECT_EQ(listed, ta.size() - 1);

  const WVFTable loaded = load_wvf_table((a / "seed_1/table.wvf").string());
  EXPECT_EQ(loaded.meta.extra.at("seed"), "1");
}

TEST(Pipeline, ComposeWritesStatsPerExpression) {
  const fs::path root = scratch("compose");
  const RunReport r =
      run_experiment(write_config(root, compose_config(root / "out")));
  ASSERT_FALSE(r.failure) << *r.failure;
  const auto rows = lines(test::read_text((root / "out/seed_0/compose_stats.csv").string()));
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], "label,mean_return,stddev,episodes,success_rate,truncated");
  for (std::size_t i = 1; i < rows.size(); i += 2) {
    const auto got = fields(rows[i]);
    const auto opt = fields(rows[i + 1]);
    EXPECT_EQ(opt[0], got[0] + " [oracle]");
    EXPECT_NEAR(parse_double(got[1]), parse_double(opt[1]), 0.05);
  }
}

TEST(Pipeline, StageFailureLeavesPartialManifest) {
  const fs::path root = scratch("failure");
  std::string cfg = compose_config(root / "out");
  cfg = std::regex_replace(cfg, std::regex("compose.tasks = [^\n]*\n"), "");
  cfg = std::regex_replace(cfg, std::regex("run.stages = compose"),
                           "run.stages = oracle,compose");
  const RunReport r = run_experiment(write_config(root, cfg));
  ASSERT_TRUE(r.failure);
  EXPECT_NE(r.failure->find("compose"), std::string::npos);
  const std::string manifest = test::read_text((root / "out/manifest.txt").string());
  EXPECT_NE(manifest.find("status=failed"), std::string::npos);
  EXPECT_NE(manifest.find("failure=seed 0, stage compose"), std::string::npos);
  EXPECT_NE(manifest.find("seed_0/oracle.wvf"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const fs::path root = scratch("cli");
  const fs::path good = write_config(root, compose_config(root / "out"));
  EXPECT_EQ(run_cli("compose --config " + good.string() +
                    " --expr 'blue & ~square'"),
            0);
  EXPECT_TRUE(fs::exists(root / "out/compose_stats.csv"));
  EXPECT_EQ(run_cli("oracle --config " + good.string()), 0);
  EXPECT_EQ(run_cli("eval --config " + good.string() + " --table " +
                    (root / "out/oracle.wvf").string() + " --out " +
                    (root / "eval").string()),
            0);
  EXPECT_TRUE(fs::exists(root / "eval/eval_summary.csv"));

  const fs::path bad_dir = root / "bad";
  fs::create_directories(bad_dir);
  const fs::path bad = write_config(
      bad_dir, "env.map = /nonexistent/rooms.map\n");
  EXPECT_EQ(run_cli("run --config " + bad.string()), 2);
  EXPECT_EQ(run_cli("run"), 2);

  EXPECT_EQ(run_cli("compose --config " + good.string() + " --expr 'blue |'"),
            3);
  EXPECT_EQ(run_cli("eval --config " + good.string() +
                    " --table /nonexistent/t.wvf"),
            3);
}
