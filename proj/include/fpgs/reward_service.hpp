#pragma once

// Long-lived reward evaluator for an external policy trainer. Speaks
// line-delimited JSON, one request object per line and one reply per line:
//
//   {"type":"load","tasksets":[...]}            -> {"ok":N}
//   {"type":"eval","id":i,"order":[...]}         -> RewardReply
//   {"type":"eval_batch","items":[{id,order}]}   -> {"results":[RewardReply...]}
//   {"type":"heuristic","id":i,"name":"DM"}     -> {"order":[...]}
//   {"type":"gen","cfg":GenConfig,"count":k}     -> {"ids":[...]}
//   {"type":"shutdown"}                          -> (no reply; server exits)
//
// Failures reply {"error":msg} and keep the session open. Taskset ids are
// store indices, assigned in load/gen order starting at 0.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <functional>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "fpgs/parallel.hpp"
#include "fpgs/priority_assign.hpp"
#include "fpgs/sched_tests.hpp"
#include "fpgs/task_model.hpp"
#include "fpgs/taskset_gen.hpp"

namespace fpgs {

/// Dense reward of one order: per_task[t] is the pass flag of the task
/// placed at decode step t, reward is their mean.
struct RewardReply {
  std::size_t id{0};
  std::vector<int> per_task;
  double reward{0.0};
  bool schedulable{false};

  friend bool operator==(const RewardReply&, const RewardReply&) = default;
};

inline nlohmann::json to_json(const RewardReply& r) {
  return {{"id", r.id}, {"per_task", r.per_task}, {"reward", r.reward}, {"schedulable", r.schedulable}};
}

inline RewardReply compute_reward(const TaskSet& ts, const PriorityOrder& order, std::size_t id = 0) {
  if (!order.is_permutation_of(ts.size())) throw Error("order is not a permutation of 0..N-1");
  RewardReply r;
  r.id = id;
  PartialState state;
  std::vector<Interferer> hp;
  std::vector<Time> scratch;
  int passed = 0;
  for (int k : order.order) {
    const bool ok = extend(ts, TestKind::RtaLc, state, k, hp, scratch);
    r.per_task.push_back(ok ? 1 : 0);
    passed += ok ? 1 : 0;
  }
  r.reward = static_cast<double>(passed) / static_cast<double>(ts.size());
  r.schedulable = passed == static_cast<int>(ts.size());
  return r;
}

class RewardService {
 public:
  explicit RewardService(unsigned jobs = 0) : jobs_(jobs == 0 ? default_jobs() : jobs) {}

  std::size_t store_size() const {
    std::shared_lock lock(mu_);
    return store_.size();
  }

  /// Handles one request line. Returns false for a shutdown request, in
  /// which case `reply` is left empty.
  bool handle(const std::string& line, std::string& reply) {
    reply.clear();
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      reply = error_reply(std::string("malformed JSON: ") + e.what());
      return true;
    }
    try {
      if (!req.is_object() || !req.contains("type") || !req["type"].is_string())
        throw ParseError("request must be an object with a string \"type\"");
      const auto type = req["type"].get<std::string>();
      if (type == "shutdown") return false;
      nlohmann::json out;
      if (type == "load") out = do_load(req);
      else if (type == "eval") out = to_json(eval_item(req));
      else if (type == "eval_batch") out = do_eval_batch(req);
      else if (type == "heuristic") out = do_heuristic(req);
      else if (type == "gen") out = do_gen(req);
      else throw ParseError("unknown message type \"" + type + "\"");
      reply = out.dump();
    } catch (const std::exception& e) {
      reply = error_reply(e.what());
    }
    return true;
  }

  /// Serves one line stream until shutdown or end of input.
  bool serve_stream(std::istream& in, std::ostream& out) {
    std::string line, reply;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (!handle(line, reply)) return false;
      out << reply << '\n';
      out.flush();
    }
    return true;
  }

  /// Listens on 127.0.0.1:port (0 picks a free port, reported through
  /// on_ready) with one session thread per connection. Returns after a
  /// shutdown request from any session.
  void serve_tcp(std::uint16_t port, const std::function<void(std::uint16_t)>& on_ready = {}) {
    const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (lfd < 0) throw Error("socket() failed");
    int one = 1;
    ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(lfd, 16) < 0) {
      ::close(lfd);
      throw Error("cannot listen on port " + std::to_string(port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(lfd, reinterpret_cast<sockaddr*>(&addr), &len);
    if (on_ready) on_ready(ntohs(addr.sin_port));

    std::atomic<bool> stop{false};
    std::mutex fds_mu;
    std::set<int> client_fds;
    std::vector<std::thread> sessions;
    auto stop_all = [&] {
      std::lock_guard lock(fds_mu);
      if (stop.exchange(true)) return;
      ::shutdown(lfd, SHUT_RDWR);
      for (int fd : client_fds) ::shutdown(fd, SHUT_RDWR);
    };
    while (!stop) {
      const int cfd = ::accept(lfd, nullptr, nullptr);
      if (cfd < 0) break;
      {
        std::lock_guard lock(fds_mu);
        if (stop) {
          ::close(cfd);
          break;
        }
        client_fds.insert(cfd);
      }
      sessions.emplace_back([this, cfd, &stop_all, &fds_mu, &client_fds] {
        if (!serve_fd(cfd)) stop_all();
        std::lock_guard lock(fds_mu);
        client_fds.erase(cfd);
        ::close(cfd);
      });
    }
    stop_all();
    for (auto& t : sessions) t.join();
    ::close(lfd);
  }

 private:
  static std::string error_reply(const std::string& msg) { return nlohmann::json{{"error", msg}}.dump(); }

  bool serve_fd(int fd) {
    std::string buf, reply;
    char chunk[4096];
    for (;;) {
      const ssize_t got = ::recv(fd, chunk, sizeof chunk, 0);
      if (got <= 0) return true;
      buf.append(chunk, static_cast<std::size_t>(got));
      std::size_t start = 0;
      for (std::size_t nl; (nl = buf.find('\n', start)) != std::string::npos; start = nl + 1) {
        const std::string line = buf.substr(start, nl - start);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (!handle(line, reply)) return false;
        reply.push_back('\n');
        if (!send_all(fd, reply)) return true;
      }
      buf.erase(0, start);
    }
  }

  static bool send_all(int fd, const std::string& s) {
    std::size_t off = 0;
    while (off < s.size()) {
      const ssize_t n = ::send(fd, s.data() + off, s.size() - off, MSG_NOSIGNAL);
      if (n <= 0) return false;
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  TaskSet lookup(const nlohmann::json& req) const {
    if (!req.contains("id") || !req["id"].is_number_integer()) throw ParseError("missing integer \"id\"");
    const auto id = req["id"].get<long long>();
    std::shared_lock lock(mu_);
    if (id < 0 || static_cast<std::size_t>(id) >= store_.size())
      throw Error("unknown taskset id " + std::to_string(id));
    return store_[static_cast<std::size_t>(id)];
  }

  std::vector<std::size_t> append(std::vector<TaskSet> sets) {
    std::unique_lock lock(mu_);
    std::vector<std::size_t> ids;
    for (auto& ts : sets) {
      ids.push_back(store_.size());
      store_.push_back(std::move(ts));
    }
    return ids;
  }

  static PriorityOrder parse_order(const nlohmann::json& req) {
    if (!req.contains("order") || !req["order"].is_array()) throw ParseError("missing \"order\" array");
    PriorityOrder p;
    for (const auto& v : req["order"]) {
      if (!v.is_number_integer()) throw ParseError("order entries must be integers");
      p.order.push_back(v.get<int>());
    }
    return p;
  }

  RewardReply eval_item(const nlohmann::json& req) const {
    const TaskSet ts = lookup(req);
    return compute_reward(ts, parse_order(req), req["id"].get<std::size_t>());
  }

  nlohmann::json do_load(const nlohmann::json& req) {
    if (!req.contains("tasksets") || !req["tasksets"].is_array()) throw ParseError("missing \"tasksets\" array");
    std::vector<TaskSet> sets;
    for (const auto& j : req["tasksets"]) sets.push_back(taskset_from_json(j));
    const auto n = sets.size();
    append(std::move(sets));
    return {{"ok", n}};
  }

  nlohmann::json do_eval_batch(const nlohmann::json& req) const {
    if (!req.contains("items") || !req["items"].is_array()) throw ParseError("missing \"items\" array");
    const auto& items = req["items"];
    std::vector<RewardReply> results(items.size());
    parallel_for(items.size(), jobs_, [&](std::size_t i) {
      try {
        results[i] = eval_item(items[i]);
      } catch (const std::exception& e) {
        throw Error("item " + std::to_string(i) + ": " + e.what());
      }
    });
    auto arr = nlohmann::json::array();
    for (const auto& r : results) arr.push_back(to_json(r));
    return {{"results", std::move(arr)}};
  }

  nlohmann::json do_heuristic(const nlohmann::json& req) const {
    const TaskSet ts = lookup(req);
    const auto name = detail::require<std::string>(req, "name", "heuristic");
    if (name == "OPA") {
      auto r = opa(ts);
      if (!r.order) throw Error("OPA found no DA_LC-schedulable order");
      return {{"order", r.order->order}};
    }
    const std::uint64_t seed = req.contains("seed") ? req["seed"].get<std::uint64_t>() : 0;
    return {{"order", heuristic_order(ts, heuristic_from_string(name), seed).order}};
  }

  nlohmann::json do_gen(const nlohmann::json& req) {
    if (!req.contains("cfg")) throw ParseError("missing \"cfg\"");
    const GenConfig cfg = gen_config_from_json(req["cfg"]);
    const auto count = req.contains("count") ? req["count"].get<std::size_t>() : std::size_t{1};
    return {{"ids", append(gen_tasksets(cfg, count))}};
  }

  unsigned jobs_;
  mutable std::shared_mutex mu_;
  std::vector<TaskSet> store_;
};

}  // namespace fpgs
