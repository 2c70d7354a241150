#pragma once

// Experiment runners: schedulability ratio per utilization point and
// algorithm, and schedulable-permutation fractions per taskset size.
// Both emit fixed-schema CSV and are deterministic in their seed.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fpgs/parallel.hpp"
#include "fpgs/priority_assign.hpp"
#include "fpgs/sched_tests.hpp"
#include "fpgs/task_model.hpp"
#include "fpgs/taskset_gen.hpp"

namespace fpgs {

// ---------------------------------------------------------------------------
// Policy order files: one {"hash":..., "order":[...]} object per line.

using PolicyOrders = std::map<std::string, PriorityOrder>;

inline PolicyOrders read_policy_orders(std::istream& is) {
  PolicyOrders out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("policy orders: ") + e.what());
    }
    PriorityOrder p;
    p.order = detail::require<std::vector<int>>(j, "order", "policy orders");
    out[detail::require<std::string>(j, "hash", "policy orders")] = std::move(p);
  }
  return out;
}

inline PolicyOrders load_policy_orders(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("missing policy order file " + path);
  return read_policy_orders(f);
}

inline void write_policy_order(std::ostream& os, const TaskSet& ts, const PriorityOrder& p) {
  os << nlohmann::json{{"hash", taskset_hash(ts)}, {"order", p.order}}.dump() << '\n';
}

inline std::string format_fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Schedulability ratio vs utilization

struct ExperimentConfig {
  int n{8};
  int m{2};
  std::vector<double> grid;  // target utilizations; empty = {0.4m, 0.5m, ..., 0.8m}
  std::size_t sets_per_point{500};
  std::vector<std::string> algorithms{"DM", "DM_DS", "DkC", "OPA"};
  TestKind test{TestKind::RtaLc};
  std::uint64_t seed{0};
  Time t_min{10};
  Time t_max{1000};
  DeadlineModel deadline_model{DeadlineModel::Implicit};
  std::optional<std::string> policy_orders;  // required when POLICY is listed
  unsigned jobs{1};
};

inline std::vector<double> default_grid(int m) {
  std::vector<double> g;
  for (int step = 4; step <= 8; ++step) g.push_back(0.1 * step * m);
  return g;
}

struct ExperimentRow {
  double utilization{0};
  std::string algorithm;
  std::size_t schedulable_count{0};
  std::size_t total{0};
  double ratio() const { return total == 0 ? 0.0 : static_cast<double>(schedulable_count) / total; }
};

inline std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (double u : cfg.grid)
    if (u > cfg.m || u <= 0) out.push_back("grid value " + std::to_string(u) + " outside (0, m]");
  if (cfg.sets_per_point < 1) out.push_back("sets_per_point < 1");
  if (cfg.algorithms.empty()) out.push_back("no algorithms");
  return out;
}

/// Taskset `set` of grid point `point`.
inline GenConfig experiment_gen_config(const ExperimentConfig& cfg, std::size_t point, std::size_t set) {
  const auto grid = cfg.grid.empty() ? default_grid(cfg.m) : cfg.grid;
  GenConfig g;
  g.n = cfg.n;
  g.m = cfg.m;
  g.target_u = grid.at(point);
  g.t_min = cfg.t_min;
  g.t_max = cfg.t_max;
  g.deadline_model = cfg.deadline_model;
  g.seed = derive_seed(derive_seed(cfg.seed, point), set);
  return g;
}

/// Order produced by `algorithm` for ts, or none when the algorithm itself
/// reports failure (OPA).
inline std::optional<PriorityOrder> algorithm_order(const std::string& algorithm, const TaskSet& ts,
                                                    const PolicyOrders* policy) {
  if (algorithm == "OPA") return opa(ts).order;
  if (algorithm == "POLICY") {
    if (policy == nullptr) throw Error("POLICY requested without a policy order file");
    const auto it = policy->find(taskset_hash(ts));
    if (it == policy->end()) throw Error("policy order file has no entry for taskset hash " + taskset_hash(ts));
    if (!it->second.is_permutation_of(ts.size())) throw Error("policy order for " + it->first + " is not a permutation");
    return it->second;
  }
  const std::uint64_t seed = ts.seed ? splitmix64(*ts.seed) : 0;
  return heuristic_order(ts, heuristic_from_string(algorithm), seed);
}

inline std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
  if (auto v = validate(cfg); !v.empty()) throw Error("invalid experiment config: " + v.front());
  const auto grid = cfg.grid.empty() ? default_grid(cfg.m) : cfg.grid;
  std::optional<PolicyOrders> policy;
  for (const auto& a : cfg.algorithms) {
    if (a == "POLICY") {
      if (!cfg.policy_orders) throw Error("POLICY requested but no policy order file given");
      policy = load_policy_orders(*cfg.policy_orders);
    } else if (a != "OPA") {
      heuristic_from_string(a);
    }
  }

  const std::size_t n_alg = cfg.algorithms.size();
  const std::size_t per_point = cfg.sets_per_point;
  // hits[(point * per_point + set) * n_alg + alg]
  std::vector<char> hits(grid.size() * per_point * n_alg, 0);
  parallel_for(grid.size() * per_point, cfg.jobs, [&](std::size_t job) {
    const std::size_t point = job / per_point, set = job % per_point;
    const TaskSet ts = gen_taskset(experiment_gen_config(cfg, point, set));
    for (std::size_t a = 0; a < n_alg; ++a) {
      const auto order = algorithm_order(cfg.algorithms[a], ts, policy ? &*policy : nullptr);
      hits[job * n_alg + a] = order && is_schedulable(ts, *order, cfg.test);
    }
  });

  std::vector<ExperimentRow> rows;
  for (std::size_t point = 0; point < grid.size(); ++point) {
    for (std::size_t a = 0; a < n_alg; ++a) {
      ExperimentRow r;
      r.utilization = grid[point];
      r.algorithm = cfg.algorithms[a];
      r.total = per_point;
      for (std::size_t set = 0; set < per_point; ++set) r.schedulable_count += hits[(point * per_point + set) * n_alg + a];
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

inline void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  os << "utilization,algorithm,schedulable_count,total,ratio\n";
  for (const auto& r : rows)
    os << format_fixed4(r.utilization) << ',' << r.algorithm << ',' << r.schedulable_count << ',' << r.total << ','
       << format_fixed4(r.ratio()) << '\n';
}

// ---------------------------------------------------------------------------
// Schedulable-permutation fraction vs taskset size

enum class FractionMode { Exhaustive, Sampled };

struct Table1Config {
  std::vector<int> ns{4, 6, 8};
  int m{2};
  double utilization_per_processor{0.65};  // target_u = this * m
  FractionMode mode{FractionMode::Exhaustive};
  std::size_t samples{200};  // K, sampled mode
  std::size_t sets{500};
  TestKind test{TestKind::RtaLc};
  std::uint64_t seed{0};
  Time t_min{10};
  Time t_max{1000};
  DeadlineModel deadline_model{DeadlineModel::Implicit};
  std::size_t exhaustive_cap{8};
  unsigned jobs{1};
};

struct Table1Row {
  int n{0};
  double fraction{0};        // mean schedulable-permutation fraction over sets
  double fraction_sem{0};    // standard error of that mean
  double dm_fraction{0};     // share of sets whose DM order is schedulable
  std::size_t sets{0};
};

inline GenConfig table1_gen_config(const Table1Config& cfg, std::size_t row, std::size_t set) {
  GenConfig g;
  g.n = cfg.ns.at(row);
  g.m = cfg.m;
  g.target_u = cfg.utilization_per_processor * cfg.m;
  g.t_min = cfg.t_min;
  g.t_max = cfg.t_max;
  g.deadline_model = cfg.deadline_model;
  g.seed = derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(g.n)), set);
  return g;
}

inline std::vector<Table1Row> replicate_table1(const Table1Config& cfg) {
  if (cfg.sets < 1) throw Error("table1: sets must be >= 1");
  if (cfg.mode == FractionMode::Exhaustive)
    for (int n : cfg.ns)
      if (static_cast<std::size_t>(n) > cfg.exhaustive_cap)
        throw Error("table1: exhaustive mode limited to n <= " + std::to_string(cfg.exhaustive_cap));

  std::vector<Table1Row> rows;
  for (std::size_t row = 0; row < cfg.ns.size(); ++row) {
    std::vector<double> frac(cfg.sets, 0.0);
    std::vector<char> dm(cfg.sets, 0);
    parallel_for(cfg.sets, cfg.jobs, [&](std::size_t set) {
      const auto g = table1_gen_config(cfg, row, set);
      const TaskSet ts = gen_taskset(g);
      frac[set] = cfg.mode == FractionMode::Exhaustive
                      ? exhaustive_search(ts, cfg.test, cfg.exhaustive_cap).fraction.value()
                      : sampled_fraction(ts, cfg.test, cfg.samples, splitmix64(g.seed));
      dm[set] = is_schedulable(ts, dm_order(ts), cfg.test);
    });
    Table1Row r;
    r.n = cfg.ns[row];
    r.sets = cfg.sets;
    double sum = 0, sq = 0;
    for (double f : frac) sum += f;
    r.fraction = sum / cfg.sets;
    for (double f : frac) sq += (f - r.fraction) * (f - r.fraction);
    r.fraction_sem = cfg.sets > 1 ? std::sqrt(sq / (cfg.sets - 1) / cfg.sets) : 0.0;
    std::size_t dm_hits = 0;
    for (char c : dm) dm_hits += c;
    r.dm_fraction = static_cast<double>(dm_hits) / cfg.sets;
    rows.push_back(r);
  }
  return rows;
}

inline void write_csv(std::ostream& os, const std::vector<Table1Row>& rows, FractionMode mode) {
  os << "n," << (mode == FractionMode::Exhaustive ? "all_perm_fraction" : "sampled_fraction") << ",dm_fraction\n";
  for (const auto& r : rows) os << r.n << ',' << format_fixed4(r.fraction) << ',' << format_fixed4(r.dm_fraction) << '\n';
}

}  // namespace fpgs
