// fpgs: command-line front end for taskset generation, schedulability
// tests, priority assignment, simulation, experiments and the reward service.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpgs/experiment.hpp"
#include "fpgs/priority_assign.hpp"
#include "fpgs/reward_service.hpp"
#include "fpgs/sched_tests.hpp"
#include "fpgs/simulator.hpp"
#include "fpgs/task_model.hpp"
#include "fpgs/taskset_gen.hpp"

namespace {

struct Globals {
  std::uint64_t seed{0};
  unsigned jobs{0};
  std::string out;
};

/// stdout unless --out names a file.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw fpgs::Error("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<fpgs::TaskSet> read_input(const std::string& path) {
  if (path.empty() || path == "-") return fpgs::read_tasksets(std::cin);
  return fpgs::load_all(path);
}

template <typename T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v;
    if (!(is >> v)) throw fpgs::ParseError("bad list element \"" + item + "\"");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

/// Explicit --order wins; otherwise the named algorithm's order.
std::optional<fpgs::PriorityOrder> pick_order(const fpgs::TaskSet& ts, const std::string& order,
                                              const std::string& algorithm, std::uint64_t seed) {
  if (!order.empty()) {
    fpgs::PriorityOrder p{parse_list<int>(order)};
    if (!p.is_permutation_of(ts.size())) throw fpgs::Error("--order is not a permutation of 0..N-1");
    return p;
  }
  if (algorithm == "OPA") return fpgs::opa(ts).order;
  return fpgs::heuristic_order(ts, fpgs::heuristic_from_string(algorithm), seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-priority global multiprocessor scheduling toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Root seed")->envname("FPGS_SEED");
  app.add_option("--jobs", g.jobs, "Worker threads (0 = hardware concurrency)");
  app.add_option("--out", g.out, "Output file (default stdout)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate tasksets as line-delimited JSON")->fallthrough();
  fpgs::GenConfig gc;
  std::size_t gen_count = 1;
  std::string gen_deadline = "implicit";
  gen->add_option("--n", gc.n, "Tasks per set")->required();
  gen->add_option("--m", gc.m, "Processors")->required();
  gen->add_option("--u", gc.target_u, "Target total utilization")->required();
  gen->add_option("--tmin", gc.t_min, "Minimum period")->capture_default_str();
  gen->add_option("--tmax", gc.t_max, "Maximum period")->capture_default_str();
  gen->add_option("--deadline", gen_deadline, "implicit | constrained")->capture_default_str();
  gen->add_option("--count", gen_count, "Number of tasksets")->capture_default_str();

  // test
  auto* test = app.add_subcommand("test", "Run a schedulability test on given orders")->fallthrough();
  std::string input, order_str, algorithm = "DM", test_name = "RTA_LC";
  test->add_option("--input", input, "Taskset file (default stdin)");
  test->add_option("--order", order_str, "Comma-separated priority order (highest first)");
  test->add_option("--algorithm", algorithm, "Order source when --order is absent")->capture_default_str();
  test->add_option("--test", test_name, "RTA_LC | RTA_UNI | DA_LC")->capture_default_str();

  // assign
  auto* assign = app.add_subcommand("assign", "Assign priorities with a baseline algorithm")->fallthrough();
  bool as_policy = false;
  assign->add_option("--input", input, "Taskset file (default stdin)");
  assign->add_option("--algorithm", algorithm, "DM | DM_DS | DkC | SJF | RANDOM | OPA")->capture_default_str();
  assign->add_flag("--as-policy", as_policy, "Emit {hash, order} lines usable as a POLICY order file");

  // enumerate
  auto* enumerate = app.add_subcommand("enumerate", "Exhaustive or sampled permutation oracle")->fallthrough();
  std::string mode = "exhaustive";
  std::size_t samples = 1000, cap = fpgs::kDefaultExhaustiveCap;
  enumerate->add_option("--input", input, "Taskset file (default stdin)");
  enumerate->add_option("--test", test_name, "RTA_LC | RTA_UNI | DA_LC")->capture_default_str();
  enumerate->add_option("--mode", mode, "exhaustive | sampled")->capture_default_str();
  enumerate->add_option("--samples", samples, "K for sampled mode")->capture_default_str();
  enumerate->add_option("--cap", cap, "Largest N for exhaustive mode")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate global FP scheduling and report deadline misses")
                  ->fallthrough();
  std::string pattern = "synchronous";
  std::size_t trials = 0;
  fpgs::Time horizon = 0;
  sim->add_option("--input", input, "Taskset file (default stdin)");
  sim->add_option("--order", order_str, "Comma-separated priority order (highest first)");
  sim->add_option("--algorithm", algorithm, "Order source when --order is absent")->capture_default_str();
  sim->add_option("--pattern", pattern, "synchronous | random")->capture_default_str();
  sim->add_option("--trials", trials, "Extra random sporadic patterns after the synchronous one");
  sim->add_option("--horizon", horizon, "Release horizon in ticks (0 = min(lcm, 1e6))");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Schedulability ratio vs utilization (CSV)")->fallthrough();
  fpgs::ExperimentConfig ec;
  std::string grid_str, algs_str = "DM,DM_DS,DkC,OPA", policy_path;
  exp->add_option("--n", ec.n, "Tasks per set")->required();
  exp->add_option("--m", ec.m, "Processors")->required();
  exp->add_option("--grid", grid_str, "Comma-separated target utilizations (default 0.4m..0.8m)");
  exp->add_option("--sets", ec.sets_per_point, "Tasksets per grid point")->capture_default_str();
  exp->add_option("--algorithms", algs_str, "DM,DM_DS,DkC,SJF,RANDOM,OPA,POLICY")->capture_default_str();
  exp->add_option("--test", test_name, "RTA_LC | RTA_UNI | DA_LC")->capture_default_str();
  exp->add_option("--policy-orders", policy_path, "Order file for POLICY rows");
  exp->add_option("--tmin", ec.t_min)->capture_default_str();
  exp->add_option("--tmax", ec.t_max)->capture_default_str();
  exp->add_option("--deadline", gen_deadline, "implicit | constrained")->capture_default_str();

  // table1
  auto* t1 = app.add_subcommand("table1", "Schedulable-permutation fraction vs taskset size (CSV)")
                 ->fallthrough();
  fpgs::Table1Config tc;
  std::string ns_str = "4,6,8";
  t1->add_option("--n-list", ns_str, "Comma-separated taskset sizes")->capture_default_str();
  t1->add_option("--m", tc.m)->capture_default_str();
  t1->add_option("--u-per-m", tc.utilization_per_processor, "target_u = this * m")->capture_default_str();
  t1->add_option("--mode", mode, "exhaustive | sampled")->capture_default_str();
  t1->add_option("--samples", tc.samples, "K for sampled mode")->capture_default_str();
  t1->add_option("--sets", tc.sets, "Tasksets per n")->capture_default_str();
  t1->add_option("--test", test_name, "RTA_LC | RTA_UNI | DA_LC")->capture_default_str();
  t1->add_option("--tmin", tc.t_min)->capture_default_str();
  t1->add_option("--tmax", tc.t_max)->capture_default_str();
  t1->add_option("--deadline", gen_deadline, "implicit | constrained")->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "Reward service over line-delimited JSON")->fallthrough();
  std::string transport = "stdio";
  std::uint16_t port = 7878;
  serve->add_option("--transport", transport, "stdio | tcp")->capture_default_str();
  serve->add_option("--port", port, "TCP port")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      Output out(g.out);
      gc.deadline_model = fpgs::deadline_model_from_string(gen_deadline);
      gc.seed = g.seed;
      fpgs::write_tasksets(out.stream(), fpgs::gen_tasksets(gc, gen_count));
    } else if (*test) {
      Output out(g.out);
      const auto kind = fpgs::test_kind_from_string(test_name);
      for (const auto& ts : read_input(input)) {
        const auto p = pick_order(ts, order_str, algorithm, g.seed);
        nlohmann::json j;
        j["hash"] = fpgs::taskset_hash(ts);
        if (p) {
          j["order"] = p->order;
          j["verdict"] = fpgs::to_json(fpgs::evaluate(ts, *p, kind));
        } else {
          j["order"] = nullptr;
          j["verdict"] = nullptr;
        }
        out.stream() << j.dump() << '\n';
      }
    } else if (*assign) {
      Output out(g.out);
      for (const auto& ts : read_input(input)) {
        const auto r = algorithm == "OPA" ? fpgs::opa(ts)
                                          : fpgs::assign_heuristic(ts, fpgs::heuristic_from_string(algorithm), g.seed);
        if (as_policy) {
          if (!r.order) throw fpgs::Error(algorithm + " produced no order for taskset " + fpgs::taskset_hash(ts));
          fpgs::write_policy_order(out.stream(), ts, *r.order);
        } else {
          out.stream() << fpgs::to_json(r).dump() << '\n';
        }
      }
    } else if (*enumerate) {
      Output out(g.out);
      const auto kind = fpgs::test_kind_from_string(test_name);
      for (const auto& ts : read_input(input)) {
        nlohmann::json j;
        j["hash"] = fpgs::taskset_hash(ts);
        if (mode == "exhaustive") {
          const auto r = fpgs::exhaustive_search(ts, kind, cap, g.jobs);
          j["found"] = r.found;
          j["order"] = r.witness ? nlohmann::json(r.witness->order) : nlohmann::json(nullptr);
          j["schedulable_orders"] = r.fraction.num;
          j["total_orders"] = r.fraction.den;
          j["fraction"] = r.fraction.value();
        } else if (mode == "sampled") {
          j["samples"] = samples;
          j["fraction"] = fpgs::sampled_fraction(ts, kind, samples, g.seed);
        } else {
          throw fpgs::ParseError("unknown mode \"" + mode + "\"");
        }
        out.stream() << j.dump() << '\n';
      }
    } else if (*sim) {
      Output out(g.out);
      for (const auto& ts : read_input(input)) {
        const auto p = pick_order(ts, order_str, algorithm, g.seed);
        if (!p) throw fpgs::Error("no order to simulate");
        fpgs::SimResult r;
        if (trials > 0) {
          r = fpgs::simulate(ts, *p, fpgs::ArrivalPattern::synchronous(horizon));
          for (std::size_t t = 0; t < trials && !r.miss; ++t)
            r = fpgs::simulate(ts, *p, fpgs::ArrivalPattern::random_sporadic(fpgs::derive_seed(g.seed, t), horizon));
        } else if (pattern == "synchronous") {
          r = fpgs::simulate(ts, *p, fpgs::ArrivalPattern::synchronous(horizon));
        } else if (pattern == "random") {
          r = fpgs::simulate(ts, *p, fpgs::ArrivalPattern::random_sporadic(g.seed, horizon));
        } else {
          throw fpgs::ParseError("unknown pattern \"" + pattern + "\"");
        }
        out.stream() << fpgs::to_json(r).dump() << '\n';
      }
    } else if (*exp) {
      Output out(g.out);
      if (!grid_str.empty()) ec.grid = parse_list<double>(grid_str);
      ec.algorithms = split_names(algs_str);
      ec.test = fpgs::test_kind_from_string(test_name);
      if (!policy_path.empty()) ec.policy_orders = policy_path;
      ec.deadline_model = fpgs::deadline_model_from_string(gen_deadline);
      ec.seed = g.seed;
      ec.jobs = g.jobs;
      fpgs::write_csv(out.stream(), fpgs::run_experiment(ec));
    } else if (*t1) {
      Output out(g.out);
      tc.ns = parse_list<int>(ns_str);
      if (mode == "exhaustive") tc.mode = fpgs::FractionMode::Exhaustive;
      else if (mode == "sampled") tc.mode = fpgs::FractionMode::Sampled;
      else throw fpgs::ParseError("unknown mode \"" + mode + "\"");
      tc.test = fpgs::test_kind_from_string(test_name);
      tc.deadline_model = fpgs::deadline_model_from_string(gen_deadline);
      tc.seed = g.seed;
      tc.jobs = g.jobs;
      fpgs::write_csv(out.stream(), fpgs::replicate_table1(tc), tc.mode);
    } else if (*serve) {
      fpgs::RewardService service(g.jobs);
      if (transport == "stdio") {
        service.serve_stream(std::cin, std::cout);
      } else if (transport == "tcp") {
        service.serve_tcp(port, [](std::uint16_t p) { std::cerr << "listening on 127.0.0.1:" << p << std::endl; });
      } else {
        throw fpgs::ParseError("unknown transport \"" + transport + "\"");
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "fpgs: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
