#pragma once

// Discrete-event simulator of preemptive global fixed-priority scheduling.
// It can only falsify a schedulability claim: a run without misses proves
// nothing about other arrival patterns.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "fpgs/parallel.hpp"
#include "fpgs/task_model.hpp"

namespace fpgs {

inline constexpr Time kDefaultHorizonCap = 1'000'000;

struct ArrivalPattern {
  enum class Kind { Synchronous, RandomSporadic };
  Kind kind{Kind::Synchronous};
  std::uint64_t seed{0};
  Time horizon{0};  // jobs are released strictly before this tick; 0 = default

  static ArrivalPattern synchronous(Time horizon = 0) { return {Kind::Synchronous, 0, horizon}; }
  static ArrivalPattern random_sporadic(std::uint64_t seed, Time horizon = 0) {
    return {Kind::RandomSporadic, seed, horizon};
  }
};

struct Miss {
  int task{-1};
  Time time{0};
  friend bool operator==(const Miss&, const Miss&) = default;
};

struct SimResult {
  bool miss{false};
  std::optional<Miss> first_miss;
  std::vector<Time> max_response;  // worst observed response per task id (completed jobs)
};

inline nlohmann::json to_json(const SimResult& r) {
  nlohmann::json j;
  j["miss"] = r.miss;
  j["first_miss"] = r.first_miss ? nlohmann::json{{"task", r.first_miss->task}, {"time", r.first_miss->time}}
                                 : nlohmann::json(nullptr);
  return j;
}

/// min(lcm of periods, cap), without overflowing.
inline Time default_horizon(const TaskSet& ts, Time cap = kDefaultHorizonCap) {
  Time l = 1;
  for (const auto& t : ts.tasks) {
    l = std::lcm(l, t.T);
    if (l >= cap || l <= 0) return cap;
  }
  return std::min(l, cap);
}

/// Release times per task. Synchronous: 0, T, 2T, ... Random sporadic: the
/// first release is Geometric(0.1) capped at T after 0, later gaps are
/// T + Geometric(0.1) capped at 2T.
inline std::vector<std::vector<Time>> release_times(const TaskSet& ts, const ArrivalPattern& p) {
  const Time horizon = p.horizon > 0 ? p.horizon : default_horizon(ts);
  std::vector<std::vector<Time>> rel(ts.size());
  std::mt19937_64 rng(p.seed);
  std::geometric_distribution<Time> extra(0.1);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Time T = ts[i].T;
    if (p.kind == ArrivalPattern::Kind::Synchronous) {
      for (Time a = 0; a < horizon; a += T) rel[i].push_back(a);
    } else {
      for (Time a = std::min(extra(rng), T); a < horizon; a += T + std::min(extra(rng), T)) rel[i].push_back(a);
    }
  }
  return rel;
}

/// Runs the schedule until every released job has completed or the first
/// deadline miss. At each instant the m highest-priority pending jobs run;
/// at most one job per task is pending before a miss because D <= T and
/// releases are at least T apart.
inline SimResult simulate(const TaskSet& ts, const PriorityOrder& order,
                          const std::vector<std::vector<Time>>& releases) {
  const std::size_t n = ts.size();
  if (!order.is_permutation_of(n)) throw Error("simulate: order is not a permutation");
  constexpr Time kNever = std::numeric_limits<Time>::max();

  SimResult res;
  res.max_response.assign(n, 0);
  std::vector<std::size_t> next_job(n, 0);
  std::vector<Time> remaining(n, 0), released_at(n, 0), deadline(n, kNever);
  std::vector<int> running;
  running.reserve(static_cast<std::size_t>(ts.m));

  auto next_release = [&](std::size_t i) {
    return next_job[i] < releases[i].size() ? releases[i][next_job[i]] : kNever;
  };

  Time now = 0;
  for (;;) {
    // releases at `now`; a job still pending at its successor's release has
    // missed already (its deadline is no later than that release)
    for (std::size_t i = 0; i < n; ++i) {
      while (next_release(i) == now) {
        remaining[i] = ts[i].C;
        released_at[i] = now;
        deadline[i] = now + ts[i].D;
        ++next_job[i];
      }
    }
    // m highest-priority pending jobs run until the next event
    running.clear();
    for (int k : order.order) {
      if (remaining[k] > 0) {
        running.push_back(k);
        if (static_cast<int>(running.size()) == ts.m) break;
      }
    }
    Time next = kNever;
    for (std::size_t i = 0; i < n; ++i) {
      next = std::min(next, next_release(i));
      if (remaining[i] > 0) next = std::min(next, deadline[i]);
    }
    for (int k : running) next = std::min(next, now + remaining[k]);
    if (next == kNever) break;

    const Time dt = next - now;
    for (int k : running) {
      remaining[k] -= dt;
      if (remaining[k] == 0) {
        res.max_response[k] = std::max(res.max_response[k], next - released_at[k]);
        deadline[k] = kNever;
      }
    }
    now = next;
    // deadline check in id order gives the task-id tie-break
    for (std::size_t i = 0; i < n; ++i) {
      if (remaining[i] > 0 && deadline[i] <= now) {
        res.miss = true;
        res.first_miss = Miss{static_cast<int>(i), deadline[i]};
        return res;
      }
    }
  }
  return res;
}

inline SimResult simulate(const TaskSet& ts, const PriorityOrder& order, const ArrivalPattern& pattern) {
  return simulate(ts, order, release_times(ts, pattern));
}

/// Synchronous release plus `trials` random sporadic patterns; true when any
/// run misses a deadline. Pattern t uses seed derive_seed(seed, t).
inline bool falsify(const TaskSet& ts, const PriorityOrder& order, std::size_t trials, std::uint64_t seed,
                    Time horizon = 0, unsigned jobs = 1) {
  if (simulate(ts, order, ArrivalPattern::synchronous(horizon)).miss) return true;
  std::vector<char> missed(trials, 0);
  parallel_for(trials, jobs, [&](std::size_t t) {
    missed[t] = simulate(ts, order, ArrivalPattern::random_sporadic(derive_seed(seed, t), horizon)).miss;
  });
  return std::any_of(missed.begin(), missed.end(), [](char c) { return c != 0; });
}

}  // namespace fpgs
