#include "wvf/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "wvf/oracle.hpp"

namespace wvf {

QTable recover_task(const WVFTable& table) {
  if (table.goal_count() == 0) {
    throw DomainError("cannot recover a task from a table with no goals");
  }
  QTable q(table.state_count(), table.action_count());
  for (StateId s = 0; s < table.state_count(); ++s) {
    for (ActionId a = 0; a < table.action_count(); ++a) {
      double best = table.at(s, 0, a);
      for (int gi = 1; gi < table.goal_count(); ++gi) {
        best = std::max(best, table.at(s, gi, a));
      }
      q.at(s, a) = best;
    }
  }
  q.meta = table.meta;
  return q;
}

Policy greedy_policy(const QTable& q) {
  Policy policy(q.state_count());
  for (StateId s = 0; s < q.state_count(); ++s) policy[s] = q.greedy(s);
  return policy;
}

MasteryReport mastery_eval(const WVFTable& table, const Environment& env,
                           int horizon) {
  const WorldSpec& world = env.world();
  if (table.state_count() != world.state_count() ||
      table.action_count() != world.action_count()) {
    throw DomainError("table does not match the environment");
  }
  MasteryReport report;
  for (StateId start = 0; start < world.state_count(); ++start) {
    const auto reachable = reachable_goals(world, start, table.goals());
    std::vector<bool> ok(world.state_count(), false);
    for (StateId g : reachable) ok[g] = true;
    for (int gi = 0; gi < table.goal_count(); ++gi) {
      const StateId goal = table.goal_state(gi);
      if (!ok[goal]) {
        ++report.excluded_pairs;
        continue;
      }
      RolloutOutcome out;
      out.start = start;
      out.goal = goal;
      EnvState state{start, false};
      while (out.steps < horizon) {
        const StateId s = state.agent;
        const StepResult step = env.step(state, table.greedy(s, gi));
        ++out.steps;
        if (step.absorbing) {
          out.terminal_state = s;
          break;
        }
        state = step.next;
      }
      out.reached = out.terminal_state == goal;
      if (out.reached) ++report.successes;
      report.outcomes.push_back(out);
    }
  }
  return report;
}

GoalValues::GoalValues(int state_count, std::vector<StateId> goals)
    : state_count_(state_count),
      goals_(std::move(goals)),
      values_(static_cast<std::size_t>(state_count) * goals_.size(), 0.0) {}

double GoalValues::value(StateId s) const { return at(s, best_goal(s)); }

int GoalValues::best_goal(StateId s) const {
  if (goals_.empty()) throw DomainError("no goals to choose from");
  int best = 0;
  for (int gi = 1; gi < goal_count(); ++gi) {
    if (at(s, gi) > at(s, best)) best = gi;
  }
  return best;
}

GoalValues zero_shot_values(const WVFTable& table, const WorldSpec& world,
                            const TaskSpec& new_task) {
  if (table.state_count() != world.state_count() ||
      table.action_count() != world.action_count()) {
    throw DomainError("table does not match the world");
  }
  if (new_task.state_count() != world.state_count() ||
      new_task.action_count() != world.action_count()) {
    throw DomainError("task '" + new_task.name() + "' does not match the world");
  }
  GoalValues out(table.state_count(), table.goals());
  for (int gi = 0; gi < table.goal_count(); ++gi) {
    const StateId g = table.goal_state(gi);
    const auto reward = new_task.max_terminal_reward(world, g);
    if (!reward) {
      throw DomainError("goal " + std::to_string(g) +
                        " has no terminal action in this world");
    }
    const double correction = *reward - table.value(g, gi);
    for (StateId s = 0; s < table.state_count(); ++s) {
      out.at(s, gi) = table.value(s, gi) + correction;
    }
  }
  return out;
}

Policy zero_shot_policy(const WVFTable& table, const GoalValues& estimate) {
  if (estimate.goals() != table.goals() ||
      estimate.state_count() != table.state_count()) {
    throw DomainError("estimate was not computed from this table");
  }
  Policy policy(table.state_count());
  for (StateId s = 0; s < table.state_count(); ++s) {
    policy[s] = table.greedy(s, estimate.best_goal(s));
  }
  return policy;
}

// ---------------------------------------------------------------------------
// Expressions

namespace {

using NodePtr = std::shared_ptr<const TaskExpression::Node>;

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  NodePtr expr() {
    NodePtr lhs = term();
    while (accept('|')) lhs = binary(TaskExpression::Op::Or, lhs, term());
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = factor();
    while (accept('&')) lhs = binary(TaskExpression::Op::And, lhs, factor());
    return lhs;
  }

  NodePtr factor() {
    if (accept('~')) {
      auto n = std::make_shared<TaskExpression::Node>();
      n->op = TaskExpression::Op::Not;
      n->lhs = factor();
      return n;
    }
    if (accept('(')) {
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_' || text_[pos_] == '-' || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ == start) {
      fail(pos_ < text_.size() ? "unexpected '" + std::string(1, text_[pos_]) + "'"
                               : "unexpected end of expression");
    }
    auto n = std::make_shared<TaskExpression::Node>();
    n->name = std::string(text_.substr(start, pos_ - start));
    return n;
  }

  static NodePtr binary(TaskExpression::Op op, NodePtr l, NodePtr r) {
    auto n = std::make_shared<TaskExpression::Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  void skip() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ExpressionError("expression '" + std::string(text_) + "' at column " +
                          std::to_string(pos_ + 1) + ": " + why);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void render(const TaskExpression::Node& n, std::string& out) {
  switch (n.op) {
    case TaskExpression::Op::Leaf: out += n.name; return;
    case TaskExpression::Op::Not:
      out += "~";
      render(*n.lhs, out);
      return;
    case TaskExpression::Op::Or:
    case TaskExpression::Op::And:
      out += "(";
      render(*n.lhs, out);
      out += n.op == TaskExpression::Op::Or ? " | " : " & ";
      render(*n.rhs, out);
      out += ")";
      return;
  }
}

// Entrywise evaluation shared by WVF and task-reward composition. `sup` and
// `inf` may be null when the expression has no negation.
std::vector<double> evaluate(
    const TaskExpression::Node& n,
    const std::function<const std::vector<double>&(const std::string&)>& leaf,
    const std::vector<double>* sup, const std::vector<double>* inf) {
  switch (n.op) {
    case TaskExpression::Op::Leaf: return leaf(n.name);
    case TaskExpression::Op::Not: {
      if (!sup || !inf) {
        throw UsageError("negation needs SUP and INF anchors");
      }
      // ~~x is x; skipping the pair avoids two roundings.
      if (n.lhs->op == TaskExpression::Op::Not) {
        return evaluate(*n.lhs->lhs, leaf, sup, inf);
      }
      std::vector<double> v = evaluate(*n.lhs, leaf, sup, inf);
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = ((*sup)[i] - v[i]) + (*inf)[i];
      }
      return v;
    }
    case TaskExpression::Op::Or:
    case TaskExpression::Op::And: {
      std::vector<double> l = evaluate(*n.lhs, leaf, sup, inf);
      const std::vector<double> r = evaluate(*n.rhs, leaf, sup, inf);
      const bool is_or = n.op == TaskExpression::Op::Or;
      for (std::size_t i = 0; i < l.size(); ++i) {
        l[i] = is_or ? std::max(l[i], r[i]) : std::min(l[i], r[i]);
      }
      return l;
    }
  }
  return {};
}

}  // namespace

TaskExpression TaskExpression::parse(std::string_view text) {
  return TaskExpression(Parser(text).parse());
}

TaskExpression TaskExpression::leaf(std::string name) {
  auto n = std::make_shared<Node>();
  n->name = std::move(name);
  return TaskExpression(std::move(n));
}

TaskExpression TaskExpression::make_or(TaskExpression a, TaskExpression b) {
  auto n = std::make_shared<Node>();
  n->op = Op::Or;
  n->lhs = std::move(a.root_);
  n->rhs = std::move(b.root_);
  return TaskExpression(std::move(n));
}

TaskExpression TaskExpression::make_and(TaskExpression a, TaskExpression b) {
  auto n = std::make_shared<Node>();
  n->op = Op::And;
  n->lhs = std::move(a.root_);
  n->rhs = std::move(b.root_);
  return TaskExpression(std::move(n));
}

TaskExpression TaskExpression::make_not(TaskExpression a) {
  auto n = std::make_shared<Node>();
  n->op = Op::Not;
  n->lhs = std::move(a.root_);
  return TaskExpression(std::move(n));
}

std::string TaskExpression::to_string() const {
  std::string out;
  render(*root_, out);
  return out;
}

std::vector<std::string> TaskExpression::identifiers() const {
  std::vector<std::string> out;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    if (n.op == Op::Leaf) {
      if (std::find(out.begin(), out.end(), n.name) == out.end()) {
        out.push_back(n.name);
      }
      return;
    }
    walk(*n.lhs);
    if (n.rhs) walk(*n.rhs);
  };
  walk(*root_);
  return out;
}

bool TaskExpression::uses_negation() const {
  std::function<bool(const Node&)> walk = [&](const Node& n) {
    if (n.op == Op::Not) return true;
    if (n.op == Op::Leaf) return false;
    return walk(*n.lhs) || (n.rhs && walk(*n.rhs));
  };
  return walk(*root_);
}

AlgebraContext::AlgebraContext(WVFTable sup, WVFTable inf)
    : sup_(std::move(sup)), inf_(std::move(inf)) {
  if (!sup_.same_index(inf_)) {
    throw DomainError("SUP and INF tables must share index maps");
  }
}

void AlgebraContext::validate_ordering(double slack) const {
  const auto& s = sup_.values();
  const auto& i = inf_.values();
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] < i[k] - slack) {
      throw DomainError("SUP table lies below INF table at entry " +
                        std::to_string(k));
    }
  }
}

WVFTable compose(const TaskExpression& expr, const AlgebraContext* context,
                 const std::map<std::string, WVFTable>& tables) {
  if (expr.uses_negation() && !context) {
    throw UsageError("expression '" + expr.to_string() +
                     "' uses negation but no SUP/INF context was given");
  }
  const WVFTable* shape = context ? &context->sup() : nullptr;
  for (const std::string& id : expr.identifiers()) {
    auto it = tables.find(id);
    if (it == tables.end()) {
      throw DomainError("no table named '" + id + "'");
    }
    if (!shape) shape = &it->second;
    if (!it->second.same_index(*shape)) {
      throw DomainError("table '" + id + "' does not share the index maps");
    }
  }
  auto leaf = [&](const std::string& id) -> const std::vector<double>& {
    return tables.at(id).values();
  };
  std::vector<double> values =
      evaluate(expr.root(), leaf, context ? &context->sup().values() : nullptr,
               context ? &context->inf().values() : nullptr);
  WVFTable out(shape->state_count(), shape->goals(), shape->action_count());
  out.values() = std::move(values);
  out.meta = shape->meta;
  out.meta.extra.erase("seed");
  std::string name = expr.to_string();
  name.erase(std::remove(name.begin(), name.end(), ' '), name.end());
  out.meta.task = name;
  out.meta.extra["source"] = "composed";
  return out;
}

TaskSpec compose_tasks(const TaskExpression& expr, const TaskSpec& sup,
                       const TaskSpec& inf,
                       const std::map<std::string, TaskSpec>& tasks,
                       const std::string& name) {
  for (const std::string& id : expr.identifiers()) {
    auto it = tasks.find(id);
    if (it == tasks.end()) throw DomainError("no task named '" + id + "'");
    if (it->second.values().size() != sup.values().size()) {
      throw DomainError("task '" + id + "' does not match the SUP task shape");
    }
  }
  auto leaf = [&](const std::string& id) -> const std::vector<double>& {
    return tasks.at(id).values();
  };
  return TaskSpec(name, sup.state_count(), sup.action_count(),
                  evaluate(expr.root(), leaf, &sup.values(), &inf.values()));
}

boost::multiprecision::cpp_int count_compositions(unsigned n) {
  boost::multiprecision::cpp_int exponent = 1;
  exponent <<= n;
  boost::multiprecision::cpp_int out = 1;
  out <<= static_cast<unsigned>(exponent);
  return out;
}

std::vector<BooleanFunction> enumerate_boolean_functions(
    const std::vector<std::string>& bases) {
  if (bases.empty() || bases.size() > 4) {
    throw DomainError("enumeration supports 1 to 4 base tasks");
  }
  const unsigned minterms = 1u << bases.size();
  const unsigned long long functions = 1ull << minterms;
  std::vector<BooleanFunction> out;
  out.reserve(functions);
  const TaskExpression first = TaskExpression::leaf(bases[0]);
  for (unsigned long long f = 0; f < functions; ++f) {
    std::optional<TaskExpression> dnf;
    if (f == 0) {
      dnf = TaskExpression::make_and(first, TaskExpression::make_not(first));
    } else if (f == functions - 1) {
      dnf = TaskExpression::make_or(first, TaskExpression::make_not(first));
    } else {
      for (unsigned m = 0; m < minterms; ++m) {
        if (!((f >> m) & 1ull)) continue;
        std::optional<TaskExpression> term;
        for (std::size_t i = 0; i < bases.size(); ++i) {
          TaskExpression lit = TaskExpression::leaf(bases[i]);
          if (!((m >> i) & 1u)) lit = TaskExpression::make_not(lit);
          term = term ? TaskExpression::make_and(*term, lit) : lit;
        }
        dnf = dnf ? TaskExpression::make_or(*dnf, *term) : *term;
      }
    }
    out.push_back({f, *dnf});
  }
  return out;
}

}  // namespace wvf
