#include "wvf/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace wvf {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw TableFormatError("not a number: '" + text + "'");
  }
  return v;
}

ActionId argmax(std::span<const double> values) {
  ActionId best = 0;
  for (std::size_t a = 1; a < values.size(); ++a) {
    if (values[a] > values[best]) best = static_cast<ActionId>(a);
  }
  return best;
}

WVFTable::WVFTable(int state_count, std::vector<StateId> goals,
                   int action_count, double initial)
    : state_count_(state_count),
      action_count_(action_count),
      goals_(std::move(goals)),
      goal_index_(state_count > 0 ? state_count : 0, -1) {
  if (state_count_ <= 0 || action_count_ <= 0) {
    throw DomainError("table needs at least one state and one action");
  }
  for (std::size_t i = 0; i < goals_.size(); ++i) {
    const StateId g = goals_[i];
    if (g < 0 || g >= state_count_) {
      throw DomainError("goal " + std::to_string(g) + " is not a state");
    }
    if (goal_index_[g] >= 0) {
      throw DomainError("goal " + std::to_string(g) + " listed twice");
    }
    goal_index_[g] = static_cast<int>(i);
  }
  values_.assign(
      static_cast<std::size_t>(state_count_) * goals_.size() * action_count_,
      initial);
}

std::optional<int> WVFTable::goal_index(StateId g) const {
  if (g < 0 || g >= state_count_ || goal_index_[g] < 0) return std::nullopt;
  return goal_index_[g];
}

double WVFTable::value(StateId s, int gi) const {
  const auto row = actions(s, gi);
  return *std::max_element(row.begin(), row.end());
}

ActionId WVFTable::greedy(StateId s, int gi) const {
  return argmax(actions(s, gi));
}

bool WVFTable::same_index(const WVFTable& other) const {
  return state_count_ == other.state_count_ &&
         action_count_ == other.action_count_ && goals_ == other.goals_;
}

QTable::QTable(int state_count, int action_count, double initial)
    : state_count_(state_count), action_count_(action_count) {
  if (state_count_ <= 0 || action_count_ <= 0) {
    throw DomainError("table needs at least one state and one action");
  }
  values_.assign(static_cast<std::size_t>(state_count_) * action_count_,
                 initial);
}

double QTable::value(StateId s) const {
  const auto row = actions(s);
  return *std::max_element(row.begin(), row.end());
}

ActionId QTable::greedy(StateId s) const { return argmax(actions(s)); }

namespace {

constexpr const char* kMagic = "WVFTBL";

void write_meta(std::ostream& out, const TableMetadata& meta,
                const std::string& kind, const std::string& goals) {
  out << "kind=" << kind << " task=" << meta.task
      << " penalty=" << format_double(meta.penalty)
      << " discount=" << format_double(meta.discount)
      << " iterations=" << meta.iterations;
  if (kind == "wvf") out << " goals=" << goals;
  for (const auto& [k, v] : meta.extra) out << " " << k << "=" << v;
  out << "\n";
}

void write_row(std::ostream& out, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ' ';
    out << format_double(row[i]);
  }
  out << '\n';
}

struct Header {
  int states = 0;
  int goals = 0;
  int actions = 0;
  std::map<std::string, std::string> kv;
};

Header read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != std::string(kMagic) + " 1") {
    throw TableFormatError("table: expected header 'WVFTBL 1'");
  }
  Header h;
  if (!std::getline(in, line)) throw TableFormatError("table: missing dims");
  std::istringstream dims(line);
  if (!(dims >> h.states >> h.goals >> h.actions) || h.states <= 0 ||
      h.goals < 0 || h.actions <= 0) {
    throw TableFormatError("table: bad dims line '" + line + "'");
  }
  if (!std::getline(in, line)) throw TableFormatError("table: missing meta");
  std::istringstream meta(line);
  std::string pair;
  while (meta >> pair) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) {
      throw TableFormatError("table: bad metadata entry '" + pair + "'");
    }
    h.kv[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return h;
}

TableMetadata take_meta(std::map<std::string, std::string> kv) {
  TableMetadata meta;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  if (auto v = take("task")) meta.task = *v;
  if (auto v = take("penalty")) meta.penalty = parse_double(*v);
  if (auto v = take("discount")) meta.discount = parse_double(*v);
  if (auto v = take("iterations")) meta.iterations = std::stol(*v);
  take("kind");
  take("goals");
  meta.extra = std::move(kv);
  return meta;
}

void read_rows(std::istream& in, std::size_t rows, int width,
               std::vector<double>& out) {
  std::string line;
  std::size_t k = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) {
      throw TableFormatError("table: expected " + std::to_string(rows) +
                             " value rows, got " + std::to_string(r));
    }
    std::istringstream row(line);
    std::string tok;
    int n = 0;
    while (row >> tok) {
      if (n >= width) {
        throw TableFormatError("table: row " + std::to_string(r) +
                               " has too many values");
      }
      const double v = parse_double(tok);
      if (!std::isfinite(v)) {
        throw TableFormatError("table: non-finite value in row " +
                               std::to_string(r));
      }
      out[k++] = v;
      ++n;
    }
    if (n != width) {
      throw TableFormatError("table: row " + std::to_string(r) + " has " +
                             std::to_string(n) + " values, expected " +
                             std::to_string(width));
    }
  }
}

}  // namespace

void write_table(std::ostream& out, const WVFTable& table) {
  out << kMagic << " 1\n"
      << table.state_count() << ' ' << table.goal_count() << ' '
      << table.action_count() << '\n';
  std::string goals;
  for (StateId g : table.goals()) {
    if (!goals.empty()) goals += ',';
    goals += std::to_string(g);
  }
  write_meta(out, table.meta, "wvf", goals);
  for (StateId s = 0; s < table.state_count(); ++s) {
    for (int gi = 0; gi < table.goal_count(); ++gi) {
      write_row(out, table.actions(s, gi));
    }
  }
}

void write_table(std::ostream& out, const QTable& table) {
  out << kMagic << " 1\n"
      << table.state_count() << " 0 " << table.action_count() << '\n';
  write_meta(out, table.meta, "q", "");
  for (StateId s = 0; s < table.state_count(); ++s) {
    write_row(out, table.actions(s));
  }
}

WVFTable read_wvf_table(std::istream& in) {
  Header h = read_header(in);
  if (h.kv["kind"] != "wvf") {
    throw TableFormatError("table: not a world value table");
  }
  std::vector<StateId> goals;
  std::istringstream list(h.kv["goals"]);
  std::string tok;
  while (std::getline(list, tok, ',')) goals.push_back(std::stoi(tok));
  if (static_cast<int>(goals.size()) != h.goals) {
    throw TableFormatError("table: goals list does not match |G|");
  }
  WVFTable table(h.states, std::move(goals), h.actions);
  read_rows(in, static_cast<std::size_t>(h.states) * h.goals, h.actions,
            table.values());
  table.meta = take_meta(std::move(h.kv));
  return table;
}

QTable read_q_table(std::istream& in) {
  Header h = read_header(in);
  if (h.kv["kind"] != "q" || h.goals != 0) {
    throw TableFormatError("table: not a task value table");
  }
  QTable table(h.states, h.actions);
  std::vector<double> values(table.values().size());
  read_rows(in, h.states, h.actions, values);
  for (StateId s = 0; s < h.states; ++s) {
    for (ActionId a = 0; a < h.actions; ++a) {
      table.at(s, a) = values[static_cast<std::size_t>(s) * h.actions + a];
    }
  }
  table.meta = take_meta(std::move(h.kv));
  return table;
}

void save_table(const std::string& path, const WVFTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TableFormatError("cannot write '" + path + "'");
  write_table(out, table);
}

void save_table(const std::string& path, const QTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TableFormatError("cannot write '" + path + "'");
  write_table(out, table);
}

WVFTable load_wvf_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TableFormatError("cannot open '" + path + "'");
  return read_wvf_table(in);
}

QTable load_q_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TableFormatError("cannot open '" + path + "'");
  return read_q_table(in);
}

}  // namespace wvf
