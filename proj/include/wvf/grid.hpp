#pragma once

#include <compare>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wvf/world.hpp"

namespace wvf {

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

std::string to_string(Cell c);

enum class Colour { Blue, Beige };
enum class Shape { Square, Circle };

struct GridObject {
  Cell cell;
  Colour colour;
  Shape shape;
};

/// Construction/parse failure. The message lists the offending cells.
class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text map, row 0 at the top:
///
///   WVFMAP 1
///   <width> <height>
///   <height rows of width characters>
///
/// `#` wall, `.` free, `H` hallway, `G` task goal, `B` blue square,
/// `b` blue circle, `Q` beige square, `q` beige circle.
struct GridLayout {
  int width = 0;
  int height = 0;
  std::vector<bool> walls;  // row-major, width * height
  std::vector<Cell> hallways;
  std::vector<Cell> goals;
  std::vector<GridObject> objects;

  static GridLayout parse(std::istream& in);
  static GridLayout parse(const std::string& text);
  static GridLayout load(const std::string& path);

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height;
  }
  bool is_wall(Cell c) const { return walls[c.y * width + c.x]; }
  bool is_free(Cell c) const { return in_bounds(c) && !is_wall(c); }
  std::optional<GridObject> object_at(Cell c) const;

  /// Checks bounds and wall/object/goal disjointness.
  void validate() const;
};

enum class GridKind { FourRooms, Pickup };

/// Movement actions share ordinals across kinds; ordinal 4 is Done in the
/// four-rooms world and PickUp in the pickup world.
enum GridAction : ActionId { North = 0, South = 1, East = 2, West = 3,
                             Terminate = 4 };
inline constexpr int kGridActionCount = 5;

struct RewardParams {
  double step = -0.1;
  double goal = 2.0;
  /// Terminal reward for Done/PickUp away from a task goal.
  double off_goal_terminal = -0.1;
  /// Bounds default to the min/max of the three values above.
  std::optional<double> reward_min;
  std::optional<double> reward_max;

  double lower() const;
  double upper() const;
};

/// Attribute predicate for pickup tasks: "blue", "beige", "square",
/// "circle" or "any".
bool object_matches(const GridObject& o, const std::string& attribute);

/// Immutable tabular grid world. State ids enumerate free cells row-major.
class GridWorld {
 public:
  GridWorld(GridLayout layout, GridKind kind, RewardParams rewards);

  GridKind kind() const { return kind_; }
  const GridLayout& layout() const { return layout_; }
  const RewardParams& rewards() const { return rewards_; }
  std::shared_ptr<const WorldSpec> world() const { return world_; }
  int state_count() const { return static_cast<int>(cells_.size()); }

  Cell cell_of(StateId s) const;
  std::optional<StateId> state_of(Cell c) const;
  std::string action_name(ActionId a) const;

  /// States within `radius` movement steps of `s` (walls respected),
  /// including `s`. Sorted ascending.
  std::vector<StateId> neighbourhood(StateId s, int radius) const;

  /// Start-state distribution support: every free cell in four-rooms, every
  /// free non-object cell in the pickup world.
  std::vector<StateId> start_states() const;

  TaskSpec task_from_cells(const std::string& name,
                           const std::vector<Cell>& cells) const;
  TaskSpec task_from_attribute(const std::string& name,
                               const std::string& attribute) const;
  /// reward_max at every terminal transition.
  TaskSpec sup_task() const;
  /// reward_min at every terminal transition.
  TaskSpec inf_task() const;

 private:
  GridLayout layout_;
  GridKind kind_;
  RewardParams rewards_;
  std::vector<Cell> cells_;
  std::vector<int> state_index_;  // row-major cell -> state or -1
  std::shared_ptr<const WorldSpec> world_;
};

struct EnvState {
  StateId agent = 0;
  bool terminated = false;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool absorbing = false;
};

/// Stepping a terminated state.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A grid world paired with one task. Cheap to copy.
class Environment {
 public:
  Environment(std::shared_ptr<const GridWorld> grid, Task task);

  const GridWorld& grid() const { return *grid_; }
  std::shared_ptr<const GridWorld> grid_ptr() const { return grid_; }
  const Task& task() const { return task_; }
  const WorldSpec& world() const { return task_.world(); }

  /// Same world, different task (and optionally a different penalty).
  Environment with_task(TaskSpec spec,
                        std::optional<double> min_penalty = std::nullopt) const;

  StepResult step(const EnvState& state, ActionId action) const;
  EnvState sample_start(std::mt19937_64& rng) const;
  std::vector<StateId> neighbourhood(StateId s, int radius) const {
    return grid_->neighbourhood(s, radius);
  }

 private:
  std::shared_ptr<const GridWorld> grid_;
  Task task_;
};

struct FourRoomsConfig {
  GridLayout layout;
  /// Task goal cells; empty means the layout's `G` cells.
  std::vector<Cell> goals;
  RewardParams rewards;
  std::optional<double> min_penalty;
  std::string task_name = "goals";
};

Environment four_rooms_build(const FourRoomsConfig& config);

struct PickupConfig {
  GridLayout layout;
  /// Attribute predicate selecting the rewarded objects.
  std::string attribute = "any";
  RewardParams rewards;
  std::optional<double> min_penalty;
};

Environment pickup_grid_build(const PickupConfig& config);

}  // namespace wvf
