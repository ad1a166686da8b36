#include "wvf/grid.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <sstream>

namespace wvf {

std::string to_string(Cell c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

namespace {

std::string join_cells(const std::vector<Cell>& cells) {
  std::string out;
  for (const Cell& c : cells) {
    if (!out.empty()) out += " ";
    out += to_string(c);
  }
  return out;
}

constexpr Cell kMoves[4] = {{0, -1}, {0, 1}, {1, 0}, {-1, 0}};

}  // namespace

GridLayout GridLayout::parse(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "WVFMAP" || version != 1) {
    throw LayoutError("map: expected header 'WVFMAP 1'");
  }
  GridLayout layout;
  if (!(in >> layout.width >> layout.height) || layout.width <= 0 ||
      layout.height <= 0) {
    throw LayoutError("map: expected positive 'width height' on line 2");
  }
  std::string line;
  std::getline(in, line);
  layout.walls.assign(static_cast<std::size_t>(layout.width) * layout.height,
                      false);
  std::vector<Cell> unknown;
  for (int y = 0; y < layout.height; ++y) {
    if (!std::getline(in, line)) {
      throw LayoutError("map: expected " + std::to_string(layout.height) +
                        " rows, got " + std::to_string(y));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != layout.width) {
      throw LayoutError("map: row " + std::to_string(y) + " has width " +
                        std::to_string(line.size()) + ", expected " +
                        std::to_string(layout.width));
    }
    for (int x = 0; x < layout.width; ++x) {
      const Cell c{x, y};
      switch (line[x]) {
        case '#': layout.walls[y * layout.width + x] = true; break;
        case '.': break;
        case 'H': layout.hallways.push_back(c); break;
        case 'G': layout.goals.push_back(c); break;
        case 'B': layout.objects.push_back({c, Colour::Blue, Shape::Square}); break;
        case 'b': layout.objects.push_back({c, Colour::Blue, Shape::Circle}); break;
        case 'Q': layout.objects.push_back({c, Colour::Beige, Shape::Square}); break;
        case 'q': layout.objects.push_back({c, Colour::Beige, Shape::Circle}); break;
        default: unknown.push_back(c);
      }
    }
  }
  if (!unknown.empty()) {
    throw LayoutError("map: unknown characters at " + join_cells(unknown));
  }
  layout.validate();
  return layout;
}

GridLayout GridLayout::parse(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

GridLayout GridLayout::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LayoutError("map: cannot open '" + path + "'");
  return parse(in);
}

std::optional<GridObject> GridLayout::object_at(Cell c) const {
  for (const GridObject& o : objects) {
    if (o.cell == c) return o;
  }
  return std::nullopt;
}

void GridLayout::validate() const {
  if (width <= 0 || height <= 0 ||
      walls.size() != static_cast<std::size_t>(width) * height) {
    throw LayoutError("layout: inconsistent dimensions");
  }
  std::vector<Cell> bad;
  auto check = [&](Cell c) {
    if (!in_bounds(c) || is_wall(c)) bad.push_back(c);
  };
  for (const Cell& c : hallways) check(c);
  for (const Cell& c : goals) check(c);
  for (const GridObject& o : objects) check(o.cell);
  std::vector<Cell> object_cells;
  for (const GridObject& o : objects) object_cells.push_back(o.cell);
  std::sort(object_cells.begin(), object_cells.end());
  for (std::size_t i = 1; i < object_cells.size(); ++i) {
    if (object_cells[i] == object_cells[i - 1]) bad.push_back(object_cells[i]);
  }
  if (!bad.empty()) {
    throw LayoutError("layout: cells on walls, out of bounds or doubly used: " +
                      join_cells(bad));
  }
}

double RewardParams::lower() const {
  return reward_min.value_or(std::min({step, goal, off_goal_terminal}));
}

double RewardParams::upper() const {
  return reward_max.value_or(std::max({step, goal, off_goal_terminal}));
}

bool object_matches(const GridObject& o, const std::string& attribute) {
  if (attribute == "any") return true;
  if (attribute == "blue") return o.colour == Colour::Blue;
  if (attribute == "beige") return o.colour == Colour::Beige;
  if (attribute == "square") return o.shape == Shape::Square;
  if (attribute == "circle") return o.shape == Shape::Circle;
  throw DomainError("unknown object attribute '" + attribute + "'");
}

GridWorld::GridWorld(GridLayout layout, GridKind kind, RewardParams rewards)
    : layout_(std::move(layout)), kind_(kind), rewards_(rewards) {
  layout_.validate();
  if (kind_ == GridKind::Pickup && layout_.objects.empty()) {
    throw LayoutError("pickup world needs at least one object");
  }
  state_index_.assign(layout_.walls.size(), -1);
  for (int y = 0; y < layout_.height; ++y) {
    for (int x = 0; x < layout_.width; ++x) {
      if (layout_.is_wall({x, y})) continue;
      state_index_[y * layout_.width + x] = static_cast<int>(cells_.size());
      cells_.push_back({x, y});
    }
  }
  const int n = state_count();
  std::vector<Transition> transitions;
  std::vector<double> background;
  transitions.reserve(static_cast<std::size_t>(n) * kGridActionCount);
  background.reserve(transitions.capacity());
  for (StateId s = 0; s < n; ++s) {
    const Cell c = cells_[s];
    for (int a = 0; a < 4; ++a) {
      const Cell to{c.x + kMoves[a].x, c.y + kMoves[a].y};
      const auto next = state_of(to);
      transitions.push_back({next.value_or(s), false});
      background.push_back(rewards_.step);
    }
    const bool terminal =
        kind_ == GridKind::FourRooms || layout_.object_at(c).has_value();
    transitions.push_back({s, terminal});
    background.push_back(rewards_.step);
  }
  world_ = std::make_shared<const WorldSpec>(n, kGridActionCount,
                                             std::move(transitions),
                                             std::move(background),
                                             rewards_.lower(), rewards_.upper());
}

Cell GridWorld::cell_of(StateId s) const {
  if (s < 0 || s >= state_count()) {
    throw DomainError("unknown state " + std::to_string(s));
  }
  return cells_[s];
}

std::optional<StateId> GridWorld::state_of(Cell c) const {
  if (!layout_.in_bounds(c)) return std::nullopt;
  const int s = state_index_[c.y * layout_.width + c.x];
  if (s < 0) return std::nullopt;
  return s;
}

std::string GridWorld::action_name(ActionId a) const {
  switch (a) {
    case North: return "North";
    case South: return "South";
    case East: return "East";
    case West: return "West";
    case Terminate: return kind_ == GridKind::FourRooms ? "Done" : "PickUp";
    default: throw DomainError("unknown action " + std::to_string(a));
  }
}

std::vector<StateId> GridWorld::neighbourhood(StateId s, int radius) const {
  if (radius < 0) throw DomainError("neighbourhood radius must be >= 0");
  cell_of(s);
  std::vector<int> dist(state_count(), -1);
  std::deque<StateId> frontier{s};
  dist[s] = 0;
  while (!frontier.empty()) {
    const StateId u = frontier.front();
    frontier.pop_front();
    if (dist[u] == radius) continue;
    for (int a = 0; a < 4; ++a) {
      const StateId v = world_->transition(u, a).next;
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  std::vector<StateId> out;
  for (StateId v = 0; v < state_count(); ++v) {
    if (dist[v] >= 0) out.push_back(v);
  }
  return out;
}

std::vector<StateId> GridWorld::start_states() const {
  std::vector<StateId> out;
  for (StateId s = 0; s < state_count(); ++s) {
    if (kind_ == GridKind::Pickup && layout_.object_at(cells_[s])) continue;
    out.push_back(s);
  }
  return out;
}

TaskSpec GridWorld::task_from_cells(const std::string& name,
                                    const std::vector<Cell>& cells) const {
  std::vector<StateId> goals;
  std::vector<Cell> bad;
  for (const Cell& c : cells) {
    const auto s = state_of(c);
    if (!s || !world_->has_terminal_action(*s)) {
      bad.push_back(c);
    } else {
      goals.push_back(*s);
    }
  }
  if (!bad.empty()) {
    throw LayoutError("task '" + name + "': goals not on terminal free cells: " +
                      join_cells(bad));
  }
  return TaskSpec::from_goals(name, *world_, goals, rewards_.goal,
                              rewards_.off_goal_terminal);
}

TaskSpec GridWorld::task_from_attribute(const std::string& name,
                                        const std::string& attribute) const {
  std::vector<StateId> goals;
  for (const GridObject& o : layout_.objects) {
    if (object_matches(o, attribute)) goals.push_back(*state_of(o.cell));
  }
  return TaskSpec::from_goals(name, *world_, goals, rewards_.goal,
                              rewards_.off_goal_terminal);
}

TaskSpec GridWorld::sup_task() const {
  return TaskSpec::from_goals("SUP", *world_, world_->terminal_states(),
                              world_->reward_max(), world_->reward_max());
}

TaskSpec GridWorld::inf_task() const {
  return TaskSpec::from_goals("INF", *world_, world_->terminal_states(),
                              world_->reward_min(), world_->reward_min());
}

Environment::Environment(std::shared_ptr<const GridWorld> grid, Task task)
    : grid_(std::move(grid)), task_(std::move(task)) {
  if (!grid_ || grid_->world() != task_.world_ptr()) {
    throw DomainError("environment task must be defined over the grid's world");
  }
}

Environment Environment::with_task(TaskSpec spec,
                                   std::optional<double> min_penalty) const {
  return Environment(
      grid_, Task(grid_->world(), std::move(spec),
                  min_penalty.value_or(task_.min_penalty())));
}

StepResult Environment::step(const EnvState& state, ActionId action) const {
  if (state.terminated) {
    throw UsageError("step called on a terminated episode");
  }
  const Transition& t = world().transition(state.agent, action);
  StepResult out;
  out.next = {t.next, t.absorbing};
  out.absorbing = t.absorbing;
  out.reward = task_.reward(state.agent, action, t.next, t.absorbing);
  return out;
}

EnvState Environment::sample_start(std::mt19937_64& rng) const {
  const auto starts = grid_->start_states();
  if (starts.empty()) throw DomainError("world has no start states");
  std::uniform_int_distribution<std::size_t> pick(0, starts.size() - 1);
  return {starts[pick(rng)], false};
}

Environment four_rooms_build(const FourRoomsConfig& config) {
  auto grid = std::make_shared<const GridWorld>(config.layout,
                                                GridKind::FourRooms,
                                                config.rewards);
  const auto& goals = config.goals.empty() ? config.layout.goals : config.goals;
  TaskSpec spec = grid->task_from_cells(config.task_name, goals);
  Task task(grid->world(), std::move(spec), config.min_penalty);
  return Environment(std::move(grid), std::move(task));
}

Environment pickup_grid_build(const PickupConfig& config) {
  auto grid = std::make_shared<const GridWorld>(config.layout,
                                                GridKind::Pickup,
                                                config.rewards);
  TaskSpec spec = grid->task_from_attribute(config.attribute, config.attribute);
  Task task(grid->world(), std::move(spec), config.min_penalty);
  return Environment(std::move(grid), std::move(task));
}

}  // namespace wvf
