#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wvf/world.hpp"

namespace wvf {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

class TableFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TableMetadata {
  std::string task = "unnamed";
  double penalty = 0.0;
  double discount = 1.0;
  long iterations = 0;
  /// Extra key=value pairs carried through serialization untouched. Keys and
  /// values must not contain whitespace or '='.
  std::map<std::string, std::string> extra;
};

/// Dense world value table Q̄(s, g, a). Goals are addressed by ordinal into
/// `goals()`; goal ordinals map to state ids.
class WVFTable {
 public:
  WVFTable(int state_count, std::vector<StateId> goals, int action_count,
           double initial = 0.0);

  int state_count() const { return state_count_; }
  int goal_count() const { return static_cast<int>(goals_.size()); }
  int action_count() const { return action_count_; }
  const std::vector<StateId>& goals() const { return goals_; }
  StateId goal_state(int gi) const { return goals_.at(gi); }
  std::optional<int> goal_index(StateId g) const;

  double& at(StateId s, int gi, ActionId a) { return values_[index(s, gi, a)]; }
  double at(StateId s, int gi, ActionId a) const {
    return values_[index(s, gi, a)];
  }
  std::span<const double> actions(StateId s, int gi) const {
    return {values_.data() + index(s, gi, 0),
            static_cast<std::size_t>(action_count_)};
  }
  /// V̄(s, g) = max_a Q̄(s, g, a).
  double value(StateId s, int gi) const;
  /// Greedy action, lowest ordinal on ties.
  ActionId greedy(StateId s, int gi) const;

  bool same_index(const WVFTable& other) const;
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  TableMetadata meta;

 private:
  std::size_t index(StateId s, int gi, ActionId a) const {
    return (static_cast<std::size_t>(s) * goals_.size() + gi) * action_count_ +
           a;
  }

  int state_count_;
  int action_count_;
  std::vector<StateId> goals_;
  std::vector<int> goal_index_;  // state -> goal ordinal or -1
  std::vector<double> values_;
};

/// Dense task value table Q(s, a).
class QTable {
 public:
  QTable(int state_count, int action_count, double initial = 0.0);

  int state_count() const { return state_count_; }
  int action_count() const { return action_count_; }
  double& at(StateId s, ActionId a) { return values_[index(s, a)]; }
  double at(StateId s, ActionId a) const { return values_[index(s, a)]; }
  std::span<const double> actions(StateId s) const {
    return {values_.data() + index(s, 0),
            static_cast<std::size_t>(action_count_)};
  }
  double value(StateId s) const;
  ActionId greedy(StateId s) const;
  const std::vector<double>& values() const { return values_; }

  TableMetadata meta;

 private:
  std::size_t index(StateId s, ActionId a) const {
    return static_cast<std::size_t>(s) * action_count_ + a;
  }

  int state_count_;
  int action_count_;
  std::vector<double> values_;
};

/// Index of the largest entry; lowest index on ties.
ActionId argmax(std::span<const double> values);

// Text format:
//   WVFTBL 1
//   <|S|> <|G|> <|A|>          (|G| = 0 for a Q table)
//   key=value key=value ...
//   one line per (s, g) block (or per s for a Q table), |A| values each
void write_table(std::ostream& out, const WVFTable& table);
void write_table(std::ostream& out, const QTable& table);
WVFTable read_wvf_table(std::istream& in);
QTable read_q_table(std::istream& in);

void save_table(const std::string& path, const WVFTable& table);
void save_table(const std::string& path, const QTable& table);
WVFTable load_wvf_table(const std::string& path);
QTable load_q_table(const std::string& path);

}  // namespace wvf
