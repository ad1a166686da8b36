#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "wvf/harness.hpp"

namespace wvf {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<NamedTask> parse_named_tasks(const std::string& key,
                                         const std::string& text) {
  std::vector<NamedTask> out;
  for (const std::string& item : split(text, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(key + ": expected 'name=definition', got '" + item +
                        "'");
    }
    out.push_back({trim(item.substr(0, eq)), trim(item.substr(eq + 1))});
  }
  return out;
}

std::vector<Cell> parse_cells(const std::string& key, const std::string& text) {
  std::vector<Cell> out;
  for (const std::string& item : split(text, ';')) {
    const auto comma = item.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(item);
      out.push_back({std::stoi(item.substr(0, comma)),
                     std::stoi(item.substr(comma + 1))});
    } catch (const std::exception&) {
      throw ConfigError(key + ": bad cell '" + item + "', expected x,y");
    }
  }
  return out;
}

}  // namespace

Config Config::parse(const std::string& text, std::filesystem::path base_dir) {
  Config config;
  config.base_dir_ = std::move(base_dir);
  config.text_ = text;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'section.key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || key.find('.') == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": key '" +
                        key + "' must look like section.key");
    }
    if (config.values_.count(key)) {
      throw ConfigError(key + ": duplicate key");
    }
    config.values_[key] = trim(line.substr(eq + 1));
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

std::optional<std::string> Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::string Config::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ConfigError(key + ": required field missing");
  return *v;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    return parse_double(*v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + *v + "'");
  }
}

long Config::get_long(const std::string& key, long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const long out = std::stol(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + *v + "'");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + *v + "'");
}

std::filesystem::path Config::get_path(const std::string& key) const {
  const std::filesystem::path p = require(key);
  return p.is_absolute() ? p : base_dir_ / p;
}

TaskSpec build_task(const GridWorld& grid, const NamedTask& task) {
  const std::string& def = task.definition;
  const GridLayout& layout = grid.layout();
  auto rest = [&](std::size_t prefix) { return def.substr(prefix); };
  if (def == "goals") return grid.task_from_cells(task.name, layout.goals);
  if (def == "hallways") return grid.task_from_cells(task.name, layout.hallways);
  if (def == "sup") return grid.sup_task();
  if (def == "inf") return grid.inf_task();
  if (def.rfind("cells:", 0) == 0) {
    return grid.task_from_cells(task.name,
                                parse_cells("task " + task.name, rest(6)));
  }
  if (def.rfind("attr:", 0) == 0) {
    return grid.task_from_attribute(task.name, rest(5));
  }
  if (def.rfind("row:", 0) == 0) {
    const std::string which = rest(4);
    int row = -1;
    auto row_has_free = [&](int y) {
      for (int x = 0; x < layout.width; ++x) {
        if (layout.is_free({x, y})) return true;
      }
      return false;
    };
    if (which == "bottom") {
      for (int y = layout.height - 1; y >= 0 && row < 0; --y) {
        if (row_has_free(y)) row = y;
      }
    } else if (which == "top") {
      for (int y = 0; y < layout.height && row < 0; ++y) {
        if (row_has_free(y)) row = y;
      }
    } else {
      try {
        row = std::stoi(which);
      } catch (const std::exception&) {
        throw ConfigError("task " + task.name + ": bad row '" + which + "'");
      }
    }
    std::vector<Cell> cells;
    for (int x = 0; x < layout.width; ++x) {
      if (layout.is_free({x, row})) cells.push_back({x, row});
    }
    if (cells.empty()) {
      throw ConfigError("task " + task.name + ": row has no free cells");
    }
    return grid.task_from_cells(task.name, cells);
  }
  throw ConfigError("task " + task.name + ": unknown definition '" + def + "'");
}

ExperimentConfig ExperimentConfig::from(const Config& c) {
  ExperimentConfig e;
  const std::string kind = c.get_string("env.kind", "four_rooms");
  if (kind == "four_rooms") {
    e.kind = GridKind::FourRooms;
  } else if (kind == "pickup") {
    e.kind = GridKind::Pickup;
  } else {
    throw ConfigError("env.kind: expected four_rooms or pickup, got '" + kind +
                      "'");
  }
  e.map_path = c.get_path("env.map");
  if (!std::filesystem::exists(e.map_path)) {
    throw ConfigError("env.map: file not found: " + e.map_path.string());
  }
  e.task.definition = c.get_string("env.task", "goals");
  e.task.name = c.get_string("env.task_name", "task");

  e.rewards.step = c.get_double("reward.step", e.rewards.step);
  e.rewards.goal = c.get_double("reward.goal", e.rewards.goal);
  e.rewards.off_goal_terminal =
      c.get_double("reward.off_goal", e.rewards.off_goal_terminal);
  if (c.has("reward.min")) e.rewards.reward_min = c.get_double("reward.min", 0);
  if (c.has("reward.max")) e.rewards.reward_max = c.get_double("reward.max", 0);
  const std::string penalty = c.get_string("reward.penalty", "auto");
  if (penalty != "auto") e.penalty = c.get_double("reward.penalty", 0);

  e.learner.learning_rate = c.get_double("learner.alpha", 0.5);
  e.learner.exploration = c.get_double("learner.epsilon", 0.3);
  e.learner.episodes = c.get_long("learner.episodes", 50000);
  e.learner.max_steps = static_cast<int>(c.get_long("learner.max_steps", 100));
  e.learner.discount = c.get_double("learner.discount", 1.0);
  e.learner.initial_value = c.get_double("learner.initial_value", 0.0);
  try {
    e.learner.validate();
  } catch (const DomainError& err) {
    throw ConfigError(std::string("learner: ") + err.what());
  }

  e.eval_episodes = c.get_long("eval.episodes", 1000);
  e.eval_horizon = static_cast<int>(c.get_long("eval.horizon", 200));
  if (e.eval_episodes <= 0) throw ConfigError("eval.episodes: must be positive");
  if (e.eval_horizon <= 0) throw ConfigError("eval.horizon: must be positive");

  e.output_dir = c.has("output.dir") ? c.get_path("output.dir")
                                     : c.base_dir() / "out";
  if (auto seeds = c.get("run.seeds")) {
    e.seeds.clear();
    for (const std::string& s : split(*seeds, ',')) {
      try {
        e.seeds.push_back(std::stoull(s));
      } catch (const std::exception&) {
        throw ConfigError("run.seeds: bad seed '" + s + "'");
      }
    }
    if (e.seeds.empty()) throw ConfigError("run.seeds: must not be empty");
  }
  if (auto stages = c.get("run.stages")) {
    e.stages = split(*stages, ',');
    static const std::vector<std::string> known{
        "oracle", "learn", "eval", "render", "infer", "zero-shot", "compose"};
    for (const std::string& s : e.stages) {
      if (std::find(known.begin(), known.end(), s) == known.end()) {
        throw ConfigError("run.stages: unknown stage '" + s + "'");
      }
    }
  }
  e.source = c.get_string("run.source", "learned");
  if (e.source != "learned" && e.source != "oracle") {
    throw ConfigError("run.source: expected learned or oracle");
  }

  e.infer_radius = static_cast<int>(c.get_long("infer.radius", 2));
  if (e.infer_radius < 0) throw ConfigError("infer.radius: must be >= 0");
  if (auto probe = c.get("infer.probe")) {
    e.infer_probe = parse_cells("infer.probe", *probe);
  }
  if (auto t = c.get("zero_shot.tasks")) {
    e.zero_shot_tasks = parse_named_tasks("zero_shot.tasks", *t);
  }
  if (auto t = c.get("compose.tasks")) {
    e.compose_tasks = parse_named_tasks("compose.tasks", *t);
  }
  if (auto x = c.get("compose.exprs")) e.compose_exprs = split(*x, ';');
  e.compose_enumerate = c.get_bool("compose.enumerate", false);
  e.config_hash = sha256_hex(c.text());
  return e;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return from(Config::load(path));
}

bool ExperimentConfig::has_stage(const std::string& stage) const {
  return std::find(stages.begin(), stages.end(), stage) != stages.end();
}

Environment build_environment(const ExperimentConfig& config) {
  GridLayout layout = GridLayout::load(config.map_path.string());
  auto grid = std::make_shared<const GridWorld>(std::move(layout), config.kind,
                                                config.rewards);
  TaskSpec spec = build_task(*grid, config.task);
  Task task(grid->world(), std::move(spec), config.penalty);
  return Environment(std::move(grid), std::move(task));
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

}  // namespace wvf
