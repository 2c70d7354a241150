#pragma once

// Task, taskset and priority-order value types, validation, and the
// line-delimited JSON taskset format.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace fpgs {

using Time = std::int64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// One periodic (sporadic) task. C = execution time, T = minimum
/// inter-arrival time, D = relative deadline, all in integer ticks.
struct Task {
  int id{0};
  Time C{1};
  Time T{1};
  Time D{1};

  double utilization() const { return static_cast<double>(C) / static_cast<double>(T); }
  friend bool operator==(const Task&, const Task&) = default;
};

struct TaskSet {
  std::vector<Task> tasks;
  int m{1};
  std::optional<std::uint64_t> seed;
  std::optional<double> target_u;

  std::size_t size() const { return tasks.size(); }
  const Task& operator[](std::size_t i) const { return tasks[i]; }

  double utilization() const {
    double u = 0.0;
    for (const auto& t : tasks) u += t.utilization();
    return u;
  }

  friend bool operator==(const TaskSet&, const TaskSet&) = default;
};

/// Position 0 holds the highest-priority task id.
struct PriorityOrder {
  std::vector<int> order;

  std::size_t size() const { return order.size(); }
  int operator[](std::size_t pos) const { return order[pos]; }

  bool is_permutation_of(std::size_t n) const {
    if (order.size() != n) return false;
    std::vector<char> seen(n, 0);
    for (int id : order) {
      if (id < 0 || static_cast<std::size_t>(id) >= n || seen[id]) return false;
      seen[id] = 1;
    }
    return true;
  }

  /// rank[id] = priority position of task id (0 = highest).
  std::vector<int> ranks() const {
    std::vector<int> r(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) r[order[pos]] = static_cast<int>(pos);
    return r;
  }

  friend bool operator==(const PriorityOrder&, const PriorityOrder&) = default;
};

namespace detail {

inline std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace detail

/// Every invariant violation of `ts`; empty when valid.
inline std::vector<std::string> validate(const TaskSet& ts) {
  std::vector<std::string> out;
  if (ts.m < 1) out.push_back("m=" + std::to_string(ts.m) + " < 1");
  if (ts.tasks.empty()) out.push_back("taskset has no tasks");
  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    const Task& t = ts.tasks[i];
    const std::string who = "task " + std::to_string(i);
    if (t.id != static_cast<int>(i))
      out.push_back(who + ": id " + std::to_string(t.id) + " != index");
    if (t.C < 1) out.push_back(who + ": C < 1");
    if (t.T < 1) out.push_back(who + ": T < 1");
    if (t.D < 1) out.push_back(who + ": D < 1");
    if (t.C > t.D) out.push_back(who + ": C > D");
    if (t.D > t.T) out.push_back(who + ": D > T");
  }
  // The capacity check is only meaningful once every task is well formed.
  if (!out.empty()) return out;
  // 1e-9 absorbs floating-point summation error of the C/T terms.
  const double u = ts.utilization();
  if (u > static_cast<double>(ts.m) + 1e-9)
    out.push_back("utilization " + detail::format_number(u) + " > m=" + std::to_string(ts.m));
  return out;
}

inline bool is_valid(const TaskSet& ts) { return validate(ts).empty(); }

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const TaskSet& ts) {
  nlohmann::json j;
  j["m"] = ts.m;
  if (ts.seed) j["seed"] = *ts.seed;
  if (ts.target_u) j["target_u"] = *ts.target_u;
  auto tasks = nlohmann::json::array();
  for (const auto& t : ts.tasks) tasks.push_back({{"id", t.id}, {"C", t.C}, {"T", t.T}, {"D", t.D}});
  j["tasks"] = std::move(tasks);
  return j;
}

namespace detail {

template <typename V>
V require(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<V>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": bad \"" + key + "\": " + e.what());
  }
}

}  // namespace detail

/// Parses one taskset object. Throws ParseError on malformed input and
/// ValidationError if the parsed set violates an invariant.
inline TaskSet taskset_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("taskset: expected a JSON object");
  TaskSet ts;
  ts.m = detail::require<int>(j, "m", "taskset");
  if (j.contains("seed") && !j["seed"].is_null()) ts.seed = detail::require<std::uint64_t>(j, "seed", "taskset");
  if (j.contains("target_u") && !j["target_u"].is_null())
    ts.target_u = detail::require<double>(j, "target_u", "taskset");
  if (!j.contains("tasks") || !j["tasks"].is_array()) throw ParseError("taskset: missing \"tasks\" array");
  for (const auto& tj : j["tasks"]) {
    const std::string where = "task " + std::to_string(ts.tasks.size());
    Task t;
    t.id = detail::require<int>(tj, "id", where);
    t.C = detail::require<Time>(tj, "C", where);
    t.T = detail::require<Time>(tj, "T", where);
    t.D = detail::require<Time>(tj, "D", where);
    ts.tasks.push_back(t);
  }
  if (auto v = validate(ts); !v.empty()) {
    std::string msg = "invalid taskset:";
    for (const auto& s : v) msg += " [" + s + "]";
    throw ValidationError(msg);
  }
  return ts;
}

inline TaskSet taskset_from_string(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("taskset: ") + e.what());
  }
  return taskset_from_json(j);
}

/// Compact single-line JSON; doubles print in shortest round-trip form so
/// parsing the line back yields a bit-identical value.
inline std::string to_line(const TaskSet& ts) { return to_json(ts).dump(); }

inline void write_tasksets(std::ostream& os, const std::vector<TaskSet>& sets) {
  for (const auto& ts : sets) os << to_line(ts) << '\n';
}

/// Reads line-delimited tasksets; blank lines are skipped.
inline std::vector<TaskSet> read_tasksets(std::istream& is) {
  std::vector<TaskSet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(taskset_from_string(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline void save(const TaskSet& ts, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << to_line(ts) << '\n';
}

inline void save_all(const std::vector<TaskSet>& sets, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  write_tasksets(f, sets);
}

inline std::vector<TaskSet> load_all(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  return read_tasksets(f);
}

/// Loads a file holding exactly one taskset.
inline TaskSet load(const std::string& path) {
  auto sets = load_all(path);
  if (sets.size() != 1)
    throw ParseError(path + ": expected one taskset, found " + std::to_string(sets.size()));
  return std::move(sets.front());
}

/// Stable 64-bit FNV-1a digest of (m, C, T, D per task) as 16 hex digits.
/// Seed and target_u are metadata and do not participate.
inline std::string taskset_hash(const TaskSet& ts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::int64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint64_t>(v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(ts.m);
  mix(static_cast<std::int64_t>(ts.tasks.size()));
  for (const auto& t : ts.tasks) {
    mix(t.C);
    mix(t.T);
    mix(t.D);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::json to_json(const PriorityOrder& p) { return p.order; }

}  // namespace fpgs
