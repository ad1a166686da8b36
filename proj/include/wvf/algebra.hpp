#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "wvf/grid.hpp"
#include "wvf/table.hpp"
#include "wvf/world.hpp"

namespace wvf {

/// Deterministic stationary policy: one action per state.
using Policy = std::vector<ActionId>;

/// Q(s, a) = max over the table's goals of Q̄(s, g, a).
QTable recover_task(const WVFTable& table);
Policy greedy_policy(const QTable& q);

struct RolloutOutcome {
  StateId start = 0;
  StateId goal = 0;
  bool reached = false;
  int steps = 0;
  /// State the episode terminated in; nullopt if the horizon ran out.
  std::optional<StateId> terminal_state;
};

struct MasteryReport {
  std::vector<RolloutOutcome> outcomes;  // reachable pairs only
  std::size_t excluded_pairs = 0;        // goal unreachable from start
  std::size_t successes = 0;

  double success_rate() const {
    return outcomes.empty() ? 0.0
                            : static_cast<double>(successes) / outcomes.size();
  }
};

/// Greedy goal-conditioned rollouts for every (start, goal) pair with the goal
/// reachable from the start. Every state is used as a start: once the goal
/// space covers the whole state space, restricting starts to S \ G would
/// leave nothing to evaluate.
MasteryReport mastery_eval(const WVFTable& table, const Environment& env,
                           int horizon);

/// Estimated goal values Ṽ(s, g) for a new task.
class GoalValues {
 public:
  GoalValues(int state_count, std::vector<StateId> goals);

  int state_count() const { return state_count_; }
  int goal_count() const { return static_cast<int>(goals_.size()); }
  const std::vector<StateId>& goals() const { return goals_; }
  double& at(StateId s, int gi) { return values_[index(s, gi)]; }
  double at(StateId s, int gi) const { return values_[index(s, gi)]; }
  /// max over goals.
  double value(StateId s) const;
  /// argmax over goals, lowest ordinal on ties.
  int best_goal(StateId s) const;

 private:
  std::size_t index(StateId s, int gi) const {
    return static_cast<std::size_t>(s) * goals_.size() + gi;
  }

  int state_count_;
  std::vector<StateId> goals_;
  std::vector<double> values_;
};

/// Ṽ(s, g) = max_a Q̄(s, g, a) + max_a R^τ(g, a) - max_a Q̄(g, g, a), with
/// the R^τ maximum taken over the actions that are terminal at g.
GoalValues zero_shot_values(const WVFTable& table, const WorldSpec& world,
                            const TaskSpec& new_task);

/// π(s) = argmax_a Q̄(s, g*, a) where g* = argmax_g Ṽ(s, g).
Policy zero_shot_policy(const WVFTable& table, const GoalValues& estimate);

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Boolean expression over task identifiers.
///
///   expr   := term ('|' term)*
///   term   := factor ('&' factor)*
///   factor := '~' factor | '(' expr ')' | ident
class TaskExpression {
 public:
  enum class Op { Leaf, Or, And, Not };

  struct Node {
    Op op = Op::Leaf;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  static TaskExpression parse(std::string_view text);
  static TaskExpression leaf(std::string name);
  static TaskExpression make_or(TaskExpression a, TaskExpression b);
  static TaskExpression make_and(TaskExpression a, TaskExpression b);
  static TaskExpression make_not(TaskExpression a);

  const Node& root() const { return *root_; }
  /// Fully parenthesised canonical text; parses back to the same tree.
  std::string to_string() const;
  /// Distinct identifiers in first-appearance order.
  std::vector<std::string> identifiers() const;
  bool uses_negation() const;

 private:
  explicit TaskExpression(std::shared_ptr<const Node> root)
      : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

/// Anchors for negation: WVFs of the SUP and INF tasks.
class AlgebraContext {
 public:
  AlgebraContext(WVFTable sup, WVFTable inf);

  const WVFTable& sup() const { return sup_; }
  const WVFTable& inf() const { return inf_; }
  /// Throws DomainError if some sup entry lies more than `slack` below the
  /// matching inf entry.
  void validate_ordering(double slack = 0.0) const;

 private:
  WVFTable sup_;
  WVFTable inf_;
};

/// Entrywise evaluation: OR = max, AND = min, NOT x = (sup - x) + inf.
WVFTable compose(const TaskExpression& expr, const AlgebraContext* context,
                 const std::map<std::string, WVFTable>& tables);

/// The same algebra over task terminal rewards.
TaskSpec compose_tasks(const TaskExpression& expr, const TaskSpec& sup,
                       const TaskSpec& inf,
                       const std::map<std::string, TaskSpec>& tasks,
                       const std::string& name);

/// 2^(2^n).
boost::multiprecision::cpp_int count_compositions(unsigned n);

struct BooleanFunction {
  /// Bit m is the output on minterm m; bit i of m is the value of base i.
  unsigned long long truth_table = 0;
  TaskExpression expression;
};

/// Every Boolean function of the given base tasks as a disjunctive normal
/// form expression. Constant false is `a & ~a`, constant true `a | ~a`.
/// Supports up to 4 bases.
std::vector<BooleanFunction> enumerate_boolean_functions(
    const std::vector<std::string>& bases);

}  // namespace wvf
