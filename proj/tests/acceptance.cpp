// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "fpgs/experiment.hpp"
#include "fpgs/priority_assign.hpp"
#include "fpgs/sched_tests.hpp"
#include "fpgs/simulator.hpp"
#include "fpgs/taskset_gen.hpp"

namespace {

using namespace fpgs;
using Clock = std::chrono::steady_clock;

// Pinned parameters and tolerances.
constexpr std::uint64_t kSeed = 20240601;
constexpr std::size_t kOpaSets = 200;
constexpr double kOpaAgreement = 1.0;
constexpr double kOpaBudgetSec = 300;
constexpr std::size_t kSoundSets = 500;
constexpr std::size_t kSoundPatterns = 100;
constexpr Time kSoundTMax = 100;
constexpr Time kSoundHorizon = 50'000;  // min(hyperperiod, this)
constexpr std::size_t kSoundControls = 50;
constexpr double kSoundBudgetSec = 600;
constexpr std::size_t kUniSets = 200;
constexpr std::size_t kEquivPairs = 1000;
constexpr std::size_t kTable1Sets = 500;
constexpr std::size_t kTable1Samples = 1000;
constexpr double kSigmas = 3.0;
constexpr std::size_t kMonoParams = 10'000;
constexpr std::size_t kMonoRtaSets = 2000;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %-34s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void opa_optimality() {
  const auto t0 = Clock::now();
  std::size_t agree = 0, feasible = 0;
  for (std::size_t s = 0; s < kOpaSets; ++s) {
    GenConfig cfg;
    cfg.n = 4 + static_cast<int>(s % 5);
    cfg.m = (s / 5) % 2 ? 4 : 2;
    cfg.target_u = ((s / 10) % 2 ? 0.65 : 0.5) * cfg.m;
    cfg.t_max = 200;
    cfg.deadline_model = DeadlineModel::Constrained;
    cfg.seed = derive_seed(kSeed + 1, s);
    const auto ts = gen_taskset(cfg);
    const bool exists = exhaustive_search(ts, TestKind::DaLc, 8).found;
    const bool found = opa(ts).order.has_value();
    agree += exists == found;
    feasible += exists;
  }
  const double secs = seconds_since(t0);
  const double rate = static_cast<double>(agree) / kOpaSets;
  report("opa_optimality", rate >= kOpaAgreement && secs < kOpaBudgetSec,
         fmt("agree=%zu/%zu feasible=%zu time=%.1fs (limit %.0fs)", agree, kOpaSets, feasible, secs, kOpaBudgetSec));
}

void soundness_falsification() {
  const auto t0 = Clock::now();
  std::size_t tested = 0, missed = 0, drawn = 0;
  while (tested < kSoundSets) {
    GenConfig cfg;
    cfg.n = 4 + static_cast<int>(drawn % 7);
    cfg.m = drawn % 3 == 2 ? 4 : 2;
    cfg.target_u = (0.4 + 0.1 * static_cast<double>(drawn % 4)) * cfg.m;
    cfg.t_max = kSoundTMax;
    cfg.deadline_model = DeadlineModel::Constrained;
    cfg.seed = derive_seed(kSeed + 2, drawn++);
    const auto ts = gen_taskset(cfg);
    const auto order = dm_order(ts);
    if (!rta_lc(ts, order).schedulable) continue;
    missed += falsify(ts, order, kSoundPatterns, cfg.seed, default_horizon(ts, kSoundHorizon), default_jobs());
    ++tested;
  }
  const double secs = seconds_since(t0);
  // Negative control: over-utilized sets (U > m) must be caught, otherwise a
  // silent simulator would pass the check vacuously.
  std::size_t caught = 0;
  for (std::size_t s = 0; s < kSoundControls; ++s) {
    GenConfig cfg;
    cfg.n = 6;
    cfg.m = 2;
    cfg.target_u = 1.9;
    cfg.t_max = kSoundTMax;
    cfg.seed = derive_seed(kSeed + 7, s);
    auto ts = gen_taskset(cfg);
    for (auto& t : ts.tasks) t.C = std::min(t.D, t.C + t.C / 4 + 1);
    caught += falsify(ts, dm_order(ts), 10, s, kSoundHorizon);
  }
  report("soundness_falsification", missed == 0 && caught == kSoundControls && secs < kSoundBudgetSec,
         fmt("sets=%zu (drawn %zu) patterns=%zu horizon<=%lld misses=%zu controls_caught=%zu/%zu time=%.1fs", tested,
             drawn, kSoundPatterns, static_cast<long long>(kSoundHorizon), missed, caught, kSoundControls, secs));
}

void uniprocessor_dm_optimality() {
  std::size_t found = 0, dm_ok = 0;
  for (std::size_t s = 0; s < kUniSets; ++s) {
    GenConfig cfg;
    cfg.n = 2 + static_cast<int>(s % 6);
    cfg.m = 1;
    cfg.target_u = std::min(0.6 + 0.1 * static_cast<double>(s % 4), 0.95);
    cfg.t_max = 200;
    cfg.deadline_model = DeadlineModel::Constrained;
    cfg.seed = derive_seed(kSeed + 3, s);
    const auto ts = gen_taskset(cfg);
    if (!exhaustive_search(ts, TestKind::RtaUni, 7).found) continue;
    ++found;
    dm_ok += rta_uniprocessor(ts, dm_order(ts)).schedulable;
  }
  report("uniprocessor_dm_optimality", found > 0 && dm_ok == found,
         fmt("dm_schedulable=%zu/%zu feasible sets (of %zu)", dm_ok, found, kUniSets));
}

void incremental_batch_equivalence() {
  std::mt19937_64 rng(kSeed + 4);
  std::size_t equal = 0;
  for (std::size_t s = 0; s < kEquivPairs; ++s) {
    GenConfig cfg;
    cfg.n = 2 + static_cast<int>(rng() % 15);
    cfg.m = 1 + static_cast<int>(rng() % 4);
    cfg.target_u = std::min<double>(cfg.n, cfg.m) * (0.5 + 0.45 * std::uniform_real_distribution<>(0, 1)(rng));
    cfg.deadline_model = s % 2 ? DeadlineModel::Constrained : DeadlineModel::Implicit;
    cfg.seed = rng();
    const auto ts = gen_taskset(cfg);
    const auto order = random_order(ts.size(), rng);
    PartialState st;
    for (int k : order.order) st = rta_lc_incremental(ts, std::move(st), k).first;
    const auto v = rta_lc(ts, order);
    bool same = st.placed == order.order;
    for (std::size_t p = 0; same && p < order.size(); ++p) {
      const int k = order[p];
      same = st.ok[p] == v.per_task_ok[k] && st.bounds[p] == v.response_bound[k];
    }
    equal += same;
  }
  report("incremental_batch_equivalence", equal == kEquivPairs, fmt("bit_equal=%zu/%zu", equal, kEquivPairs));
}

void table1_direction() {
  const auto t0 = Clock::now();
  Table1Config ex;
  ex.ns = {4, 6, 8};
  ex.sets = kTable1Sets;
  ex.seed = kSeed + 5;
  ex.jobs = default_jobs();
  Table1Config sa = ex;
  sa.ns = {10, 12, 14, 16};
  sa.mode = FractionMode::Sampled;
  sa.samples = kTable1Samples;
  const auto a = replicate_table1(ex);
  const auto b = replicate_table1(sa);

  // Decrease: consecutive means separated by more than kSigmas combined
  // standard errors. DM: its binomial share exceeds the permutation fraction
  // by more than kSigmas combined standard errors.
  auto decreasing = [](const std::vector<Table1Row>& rows, std::string& log) {
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      log += fmt(" n=%d:%.4f±%.4f/dm=%.3f", r.n, r.fraction, r.fraction_sem, r.dm_fraction);
      if (i == 0) continue;
      const auto& p = rows[i - 1];
      ok &= p.fraction - r.fraction > kSigmas * std::hypot(p.fraction_sem, r.fraction_sem);
    }
    return ok;
  };
  auto dm_above = [](const std::vector<Table1Row>& rows) {
    bool ok = true;
    for (const auto& r : rows) {
      const double dm_se = std::sqrt(r.dm_fraction * (1 - r.dm_fraction) / static_cast<double>(r.sets));
      ok &= r.dm_fraction - r.fraction > kSigmas * std::hypot(dm_se, r.fraction_sem);
    }
    return ok;
  };
  std::string log_a, log_b;
  const bool da = decreasing(a, log_a), db = decreasing(b, log_b);
  const bool dm = dm_above(a) && dm_above(b);
  report("table1_direction", da && db && dm,
         fmt("all_perm_decr=%d sampled_decr=%d dm_above=%d time=%.1fs |", da, db, dm, seconds_since(t0)) + log_a +
             " |" + log_b);
}

void monotonicity() {
  std::mt19937_64 rng(kSeed + 6);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < kMonoParams; ++i) {
    const Time T = 1 + static_cast<Time>(rng() % 200);
    const Time C = 1 + static_cast<Time>(rng() % T);
    const Time R = C + static_cast<Time>(rng() % (T - C + 1));
    Time nc_prev = -1, ci_prev = -1;
    for (Time L = 0; L <= 4 * T + 3; ++L) {
      const Time nc = workload_nc(C, T, L), ci = workload_ci(C, T, R, L);
      violations += nc < nc_prev || ci < ci_prev || nc < 0 || ci < nc;
      nc_prev = nc;
      ci_prev = ci;
    }
  }
  std::size_t iterated = 0;
  for (std::size_t s = 0; s < kMonoRtaSets; ++s) {
    GenConfig cfg;
    cfg.n = 2 + static_cast<int>(rng() % 12);
    cfg.m = 1 + static_cast<int>(rng() % 4);
    cfg.target_u = std::min<double>(cfg.n, cfg.m) * (0.6 + 0.35 * std::uniform_real_distribution<>(0, 1)(rng));
    cfg.deadline_model = DeadlineModel::Constrained;
    cfg.seed = rng();
    const auto ts = gen_taskset(cfg);
    const auto order = random_order(ts.size(), rng);
    // Per task: iterates non-decreasing, count bounded by D - C + 2.
    int cur = -1;
    Time prev = 0, steps = 0;
    auto check = [&](int k, Time r) {
      ++iterated;
      if (k != cur) {
        cur = k;
        prev = r;
        steps = 0;
        violations += r != ts[k].C;
      }
      violations += r < prev || ++steps > ts[k].D - ts[k].C + 2;
      prev = r;
    };
    rta_lc(ts, order, check);
    if (ts.m == 1) rta_uniprocessor(ts, order, check);
  }
  report("monotonicity", violations == 0,
         fmt("params=%zu rta_sets=%zu iterates=%zu violations=%zu", kMonoParams, kMonoRtaSets, iterated, violations));
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void()>> criteria[] = {
      {"opa_optimality", opa_optimality},
      {"soundness_falsification", soundness_falsification},
      {"uniprocessor_dm_optimality", uniprocessor_dm_optimality},
      {"incremental_batch_equivalence", incremental_batch_equivalence},
      {"table1_direction", table1_direction},
      {"monotonicity", monotonicity},
  };
  for (const auto& [name, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      report(name, false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
