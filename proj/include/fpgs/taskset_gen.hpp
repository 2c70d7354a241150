#pragma once

// Seeded random taskset generation: UUniFast-Discard utilizations,
// log-uniform integer periods, implicit or constrained deadlines.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fpgs/parallel.hpp"
#include "fpgs/task_model.hpp"

namespace fpgs {

enum class DeadlineModel { Implicit, Constrained };

inline std::string to_string(DeadlineModel d) {
  return d == DeadlineModel::Implicit ? "implicit" : "constrained";
}

inline DeadlineModel deadline_model_from_string(const std::string& s) {
  if (s == "implicit") return DeadlineModel::Implicit;
  if (s == "constrained") return DeadlineModel::Constrained;
  throw ParseError("unknown deadline model \"" + s + "\"");
}

struct GenConfig {
  int n{8};
  int m{2};
  double target_u{1.0};
  Time t_min{10};
  Time t_max{1000};
  DeadlineModel deadline_model{DeadlineModel::Implicit};
  std::uint64_t seed{0};
};

inline std::vector<std::string> validate(const GenConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.n < 1) out.push_back("n < 1");
  if (cfg.m < 1) out.push_back("m < 1");
  if (!(cfg.target_u > 0.0)) out.push_back("target_u must be > 0");
  if (cfg.target_u > cfg.m) out.push_back("target_u > m");
  if (cfg.target_u > cfg.n) out.push_back("target_u > n (per-task utilization cannot exceed 1)");
  if (cfg.t_min < 10) out.push_back("period_range minimum < 10");
  if (cfg.t_max < cfg.t_min) out.push_back("period_range maximum < minimum");
  return out;
}

inline nlohmann::json to_json(const GenConfig& cfg) {
  return {{"n", cfg.n},
          {"m", cfg.m},
          {"target_u", cfg.target_u},
          {"period_range", {cfg.t_min, cfg.t_max}},
          {"deadline_model", to_string(cfg.deadline_model)},
          {"seed", cfg.seed}};
}

/// Missing keys keep their defaults, except n, m and target_u.
inline GenConfig gen_config_from_json(const nlohmann::json& j) {
  GenConfig cfg;
  cfg.n = detail::require<int>(j, "n", "gen config");
  cfg.m = detail::require<int>(j, "m", "gen config");
  cfg.target_u = detail::require<double>(j, "target_u", "gen config");
  if (j.contains("period_range")) {
    const auto& pr = j["period_range"];
    if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number_integer() || !pr[1].is_number_integer())
      throw ParseError("gen config: period_range must be [T_min, T_max]");
    cfg.t_min = pr[0].get<Time>();
    cfg.t_max = pr[1].get<Time>();
  }
  if (j.contains("deadline_model"))
    cfg.deadline_model = deadline_model_from_string(detail::require<std::string>(j, "deadline_model", "gen config"));
  if (j.contains("seed")) cfg.seed = detail::require<std::uint64_t>(j, "seed", "gen config");
  return cfg;
}

/// UUniFast-Discard: n utilizations in (0, 1] summing to target_u. Vectors
/// with any entry above 1 are discarded and redrawn from the same stream.
inline std::vector<double> gen_utilizations(int n, double target_u, std::mt19937_64& rng,
                                            int max_attempts = 1'000'000) {
  if (n < 1) throw Error("gen_utilizations: n must be >= 1");
  if (!(target_u > 0.0)) throw Error("gen_utilizations: target_u must be > 0");
  if (target_u > n) throw Error("gen_utilizations: target_u > n is infeasible with u_i <= 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> u(n);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    double remaining = target_u;
    bool ok = true;
    for (int i = 0; i < n - 1; ++i) {
      const double next = remaining * std::pow(unit(rng), 1.0 / static_cast<double>(n - 1 - i));
      u[i] = remaining - next;
      remaining = next;
      if (u[i] > 1.0 || u[i] <= 0.0) ok = false;
    }
    u[n - 1] = remaining;
    if (u[n - 1] > 1.0 || u[n - 1] <= 0.0) ok = false;
    if (ok) return u;
  }
  throw Error("gen_utilizations: no admissible vector after " + std::to_string(max_attempts) + " draws");
}

inline std::vector<double> gen_utilizations(int n, double target_u, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return gen_utilizations(n, target_u, rng);
}

/// Log-uniform integer in [t_min, t_max].
inline Time draw_period(Time t_min, Time t_max, std::mt19937_64& rng) {
  if (t_min == t_max) return t_min;
  std::uniform_real_distribution<double> d(std::log(static_cast<double>(t_min)),
                                           std::log(static_cast<double>(t_max) + 1.0));
  const auto t = static_cast<Time>(std::floor(std::exp(d(rng))));
  return std::clamp(t, t_min, t_max);
}

/// Deterministic in cfg. The resulting set passes validate() and its
/// utilization is within n / t_min of cfg.target_u. Integer rounding may
/// push the total above m when target_u is close to m; such draws are
/// rejected and redrawn from the same stream.
inline TaskSet gen_taskset(const GenConfig& cfg) {
  if (auto v = validate(cfg); !v.empty()) throw Error("invalid gen config: " + v.front());
  std::mt19937_64 rng(cfg.seed);
  for (int attempt = 0; attempt < 10'000; ++attempt) {
    const auto u = gen_utilizations(cfg.n, cfg.target_u, rng);
    TaskSet ts;
    ts.m = cfg.m;
    ts.seed = cfg.seed;
    ts.target_u = cfg.target_u;
    ts.tasks.reserve(cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
      Task t;
      t.id = i;
      t.T = draw_period(cfg.t_min, cfg.t_max, rng);
      t.C = std::clamp<Time>(std::llround(u[i] * static_cast<double>(t.T)), 1, t.T);
      if (cfg.deadline_model == DeadlineModel::Implicit) {
        t.D = t.T;
      } else {
        t.D = std::uniform_int_distribution<Time>(t.C, t.T)(rng);
      }
      ts.tasks.push_back(t);
    }
    if (is_valid(ts)) return ts;
  }
  throw Error("gen_taskset: could not produce a valid taskset");
}

/// `count` tasksets; set i uses seed derive_seed(cfg.seed, i).
inline std::vector<TaskSet> gen_tasksets(GenConfig cfg, std::size_t count) {
  std::vector<TaskSet> out;
  out.reserve(count);
  const auto root = cfg.seed;
  for (std::size_t i = 0; i < count; ++i) {
    cfg.seed = derive_seed(root, i);
    out.push_back(gen_taskset(cfg));
  }
  return out;
}

}  // namespace fpgs
