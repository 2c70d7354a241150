#pragma once

// Priority-assignment baselines (DM, DM-DS, DkC, SJF, random), Audsley's
// OPA over DA_LC, and the exhaustive / sampled permutation oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fpgs/parallel.hpp"
#include "fpgs/sched_tests.hpp"
#include "fpgs/task_model.hpp"

namespace fpgs {

enum class Heuristic { DM, DM_DS, DkC, SJF, Random };

inline std::string to_string(Heuristic h) {
  switch (h) {
    case Heuristic::DM: return "DM";
    case Heuristic::DM_DS: return "DM_DS";
    case Heuristic::DkC: return "DkC";
    case Heuristic::SJF: return "SJF";
    case Heuristic::Random: return "RANDOM";
  }
  return "?";
}

inline Heuristic heuristic_from_string(const std::string& s) {
  if (s == "DM") return Heuristic::DM;
  if (s == "DM_DS" || s == "DM-DS") return Heuristic::DM_DS;
  if (s == "DkC" || s == "DKC") return Heuristic::DkC;
  if (s == "SJF") return Heuristic::SJF;
  if (s == "RANDOM") return Heuristic::Random;
  throw ParseError("unknown heuristic \"" + s + "\"");
}

struct AssignResult {
  std::optional<PriorityOrder> order;
  std::string algorithm;
  TestVerdict verdict;
};

inline nlohmann::json to_json(const AssignResult& r) {
  nlohmann::json j;
  j["algorithm"] = r.algorithm;
  j["order"] = r.order ? nlohmann::json(r.order->order) : nlohmann::json(nullptr);
  j["schedulable"] = r.verdict.schedulable;
  j["verdict"] = to_json(r.verdict);
  return j;
}

/// k = (m - 1 + sqrt(5m^2 - 6m + 1)) / (2m); equals 1 at m = 2 and 0 at m = 1.
inline double dkc_factor(int m) {
  const double md = m;
  return (md - 1.0 + std::sqrt(5.0 * md * md - 6.0 * md + 1.0)) / (2.0 * md);
}

namespace detail {

/// Ids sorted by key ascending, ties by lower id.
template <typename Key>
PriorityOrder order_by(const TaskSet& ts, Key&& key) {
  PriorityOrder p;
  p.order.resize(ts.size());
  std::iota(p.order.begin(), p.order.end(), 0);
  std::stable_sort(p.order.begin(), p.order.end(), [&](int a, int b) { return key(ts[a]) < key(ts[b]); });
  return p;
}

inline PriorityOrder dm_ds_order(const TaskSet& ts) {
  // density C/D > m/(3m-2)  <=>  C(3m-2) > mD, compared in integers.
  const Time m = ts.m;
  auto heavy = [&](const Task& t) { return t.C * (3 * m - 2) > m * std::min(t.D, t.T); };
  std::vector<int> top, rest;
  for (const auto& t : ts.tasks) (heavy(t) ? top : rest).push_back(t.id);
  std::stable_sort(top.begin(), top.end(), [&](int a, int b) {
    // C_a / D_a > C_b / D_b, densest first
    return ts[a].C * std::min(ts[b].D, ts[b].T) > ts[b].C * std::min(ts[a].D, ts[a].T);
  });
  std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) { return ts[a].D < ts[b].D; });
  PriorityOrder p;
  p.order = std::move(top);
  p.order.insert(p.order.end(), rest.begin(), rest.end());
  return p;
}

}  // namespace detail

inline PriorityOrder dm_order(const TaskSet& ts) {
  return detail::order_by(ts, [](const Task& t) { return t.D; });
}

inline PriorityOrder random_order(std::size_t n, std::mt19937_64& rng) {
  PriorityOrder p;
  p.order.resize(n);
  std::iota(p.order.begin(), p.order.end(), 0);
  std::shuffle(p.order.begin(), p.order.end(), rng);
  return p;
}

inline PriorityOrder heuristic_order(const TaskSet& ts, Heuristic h, std::uint64_t seed = 0) {
  switch (h) {
    case Heuristic::DM: return dm_order(ts);
    case Heuristic::SJF: return detail::order_by(ts, [](const Task& t) { return t.C; });
    case Heuristic::DkC: {
      const double k = dkc_factor(ts.m);
      return detail::order_by(ts, [k](const Task& t) {
        return static_cast<double>(t.D) - k * static_cast<double>(t.C);
      });
    }
    case Heuristic::DM_DS: return detail::dm_ds_order(ts);
    case Heuristic::Random: {
      std::mt19937_64 rng(seed);
      return random_order(ts.size(), rng);
    }
  }
  return {};
}

/// Heuristic order plus its RTA_LC verdict.
inline AssignResult assign_heuristic(const TaskSet& ts, Heuristic h, std::uint64_t seed = 0) {
  AssignResult r;
  r.algorithm = to_string(h);
  r.order = heuristic_order(ts, h, seed);
  r.verdict = rta_lc(ts, *r.order);
  return r;
}

/// Audsley's algorithm over DA_LC: fills priority levels from lowest to
/// highest, at each level choosing an unassigned task that passes with all
/// other unassigned tasks above it (largest D first, then lowest id). Fails
/// iff no priority order passes DA_LC.
inline AssignResult opa(const TaskSet& ts) {
  const std::size_t n = ts.size();
  AssignResult r;
  r.algorithm = "OPA";
  r.verdict = detail::empty_verdict(TestKind::DaLc, n);

  std::vector<int> unassigned(n);
  std::iota(unassigned.begin(), unassigned.end(), 0);
  std::vector<int> lowest_first;
  std::vector<int> hp;
  while (!unassigned.empty()) {
    int chosen = -1;
    Time chosen_bound = 0;
    for (int k : unassigned) {
      if (chosen >= 0 && (ts[k].D < ts[chosen].D || (ts[k].D == ts[chosen].D && k > chosen))) continue;
      hp.clear();
      for (int i : unassigned)
        if (i != k) hp.push_back(i);
      const Time b = da_lc_bound(ts, hp, k);
      if (b <= ts[k].D) {
        chosen = k;
        chosen_bound = b;
      }
    }
    if (chosen < 0) return r;  // no order exists; verdict marks only tasks placed so far
    r.verdict.per_task_ok[chosen] = true;
    r.verdict.response_bound[chosen] = chosen_bound;
    lowest_first.push_back(chosen);
    unassigned.erase(std::find(unassigned.begin(), unassigned.end(), chosen));
  }
  PriorityOrder p;
  p.order.assign(lowest_first.rbegin(), lowest_first.rend());
  r.order = std::move(p);
  r.verdict.schedulable = true;
  return r;
}

// ---------------------------------------------------------------------------
// Permutation oracles

struct Fraction {
  std::uint64_t num{0};
  std::uint64_t den{1};
  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct SearchResult {
  bool found{false};
  std::optional<PriorityOrder> witness;  // lexicographically first schedulable order
  Fraction fraction;                     // schedulable orders / N!
};

inline constexpr std::size_t kDefaultExhaustiveCap = 9;

namespace detail {

inline std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

struct Enumerator {
  const TaskSet& ts;
  TestKind test;
  std::vector<std::uint64_t> fact;
  PartialState state;
  std::vector<char> used;
  std::vector<Interferer> hp;
  std::vector<Time> scratch;
  std::uint64_t count{0};
  std::optional<PriorityOrder> witness;

  Enumerator(const TaskSet& t, TestKind k) : ts(t), test(k), used(t.size(), 0) {
    for (std::size_t i = 0; i <= ts.size(); ++i) fact.push_back(factorial(i));
  }

  // A failing prefix cannot be completed to a schedulable order, so its
  // (remaining)! completions are all counted as unschedulable by skipping.
  void dfs() {
    const std::size_t n = ts.size();
    if (state.size() == n) {
      ++count;
      if (!witness) witness = PriorityOrder{state.placed};
      return;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (used[k]) continue;
      const bool ok = extend(ts, test, state, static_cast<int>(k), hp, scratch);
      if (ok) {
        used[k] = 1;
        dfs();
        used[k] = 0;
      }
      retract(state);
    }
  }
};

}  // namespace detail

/// Enumerates all N! orders under `test`. Parallel over the first position.
inline SearchResult exhaustive_search(const TaskSet& ts, TestKind test, std::size_t cap = kDefaultExhaustiveCap,
                                      unsigned jobs = 1) {
  const std::size_t n = ts.size();
  if (n > cap) throw Error("exhaustive_search: N=" + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  if (test == TestKind::RtaUni && ts.m != 1) throw Error("RTA_UNI requires m = 1");
  std::vector<std::uint64_t> counts(n, 0);
  std::vector<std::optional<PriorityOrder>> witnesses(n);
  parallel_for(n, jobs, [&](std::size_t first) {
    detail::Enumerator e(ts, test);
    if (!extend(ts, test, e.state, static_cast<int>(first), e.hp, e.scratch)) return;
    e.used[first] = 1;
    e.dfs();
    counts[first] = e.count;
    witnesses[first] = std::move(e.witness);
  });
  SearchResult r;
  r.fraction.den = detail::factorial(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.fraction.num += counts[i];
    if (!r.witness && witnesses[i]) r.witness = witnesses[i];
  }
  r.found = r.fraction.num > 0;
  return r;
}

/// Monte-Carlo estimate of the schedulable fraction from K uniform random
/// orders; deterministic in seed.
inline double sampled_fraction(const TaskSet& ts, TestKind test, std::size_t K, std::uint64_t seed) {
  if (K == 0) throw Error("sampled_fraction: K must be >= 1");
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < K; ++s)
    if (is_schedulable(ts, random_order(ts.size(), rng), test)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(K);
}

}  // namespace fpgs
