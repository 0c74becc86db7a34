#pragma once

// Reward service: POST /v1/rank, GET /v1/healthz, GET /v1/topologies.
//
// Handlers are plain functions from request body to (status, body) so they
// can be exercised without a socket; RewardService wires them into an
// httplib server.

#include <chrono>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <variant>

#include "httplib.h"
#include "json.hpp"

#include "arena_rank/advantage.hpp"
#include "arena_rank/config.hpp"
#include "arena_rank/core.hpp"
#include "arena_rank/serialization.hpp"
#include "arena_rank/tournaments.hpp"

namespace arena_rank {

struct RankRequest {
  TrajectoryGroup group;
  Topology topology = Topology::seeded_single_elim;
  std::variant<std::string, JudgeSpec> judge;  // configured backend name, or inline spec
  std::optional<double> epsilon;
  bool include_match_log = false;
  std::uint64_t seed = 0;
  std::optional<int> swiss_rounds;
};

// Request rejected before any judge call; carries the violation list.
struct RequestError : Error {
  RequestError(const std::string& what, ValidationReport violations = {})
      : Error(what), violations(std::move(violations)) {}
  ValidationReport violations;
};

inline RankRequest parse_rank_request(const json& j) {
  if (!j.is_object()) throw RequestError("request body must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    static constexpr std::string_view known[] = {"group", "topology", "judge", "epsilon",
                                                 "include_match_log", "seed", "swiss_rounds"};
    if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known)) {
      throw RequestError("unknown request field '" + it.key() + "'",
                         {{"unknown field", "unknown request field '" + it.key() + "'"}});
    }
  }
  RankRequest req;
  try {
    req.group = j.at("group").get<TrajectoryGroup>();
  } catch (const std::exception& e) {
    throw RequestError(std::string("malformed group: ") + e.what(), {{"malformed group", e.what()}});
  }
  const std::string name = j.value("topology", std::string{});
  auto topology = parse_topology(name);
  if (!topology) {
    throw RequestError("invalid topology '" + name + "'",
                       {{"invalid topology", "topology must be one of round-robin, anchor, seeded-single-elim, "
                                             "double-elim, swiss; got '" + name + "'"}});
  }
  req.topology = *topology;
  if (auto it = j.find("judge"); it != j.end()) {
    if (it->is_string()) {
      req.judge = it->get<std::string>();
    } else {
      req.judge = judge_spec_from_json(*it);
    }
  } else {
    req.judge = std::string("default");
  }
  req.epsilon = detail::get_optional<double>(j, "epsilon");
  req.include_match_log = j.value("include_match_log", false);
  req.seed = j.value("seed", std::uint64_t{0});
  req.swiss_rounds = detail::get_optional<int>(j, "swiss_rounds");

  ValidationReport report = validate_group(req.group);
  if (!report.empty()) throw RequestError("group failed validation", std::move(report));
  return req;
}

/// Response body shared by the service and the CLI. Arrays are in group
/// (input) order, not rank order.
inline json make_rank_response(const RankingResult& result, const AdvantageVector& adv, std::uint64_t judge_seed,
                               bool include_match_log) {
  json j{{"ids", result.ids},
         {"ranks", result.ranks},
         {"rewards", adv.rewards},
         {"advantages", adv.advantages},
         {"comparison_count", result.comparison_count},
         {"topology", result.topology},
         {"tie_break_applied", result.tie_break_applied},
         {"engine_version", kEngineVersion},
         {"seeds", {{"judge", judge_seed}, {"topology", result.seed}}}};
  if (!result.tiers.empty()) j["tiers"] = result.tiers;
  if (include_match_log) j["match_log"] = result.matches;
  return j;
}

struct HttpReply {
  int status = 200;
  std::string body;
};

inline HttpReply error_reply(int status, const std::string& message, const ValidationReport& violations = {},
                             const std::optional<std::string>& match_key = std::nullopt) {
  json j{{"error", message}};
  if (!violations.empty()) {
    json v = json::array();
    for (const auto& x : violations) v.push_back({{"code", x.code}, {"message", x.message}});
    j["violations"] = std::move(v);
  }
  if (match_key) j["match_key"] = *match_key;
  return {status, j.dump()};
}

class RewardService {
 public:
  explicit RewardService(ServiceSettings settings, double default_epsilon = kDefaultAdvantageEpsilon)
      : settings_(std::move(settings)), default_epsilon_(default_epsilon) {
    for (const auto& [name, spec] : settings_.judges) {
      judges_[name] = {make_judge(spec), spec.seed};
    }
  }

  RewardService(const RewardService&) = delete;
  RewardService& operator=(const RewardService&) = delete;

  HttpReply health() const { return {200, json{{"status", "ok"}, {"engine_version", kEngineVersion}}.dump()}; }

  HttpReply topologies() const {
    json list = json::array();
    for (Topology t : kAllTopologies) {
      static const std::map<Topology, const char*> cost{{Topology::round_robin, "N(N-1)/2"},
                                                        {Topology::anchor, "N-1"},
                                                        {Topology::seeded_single_elim, "2N-2"},
                                                        {Topology::double_elim, "2N-2"},
                                                        {Topology::swiss, "ceil(log2 N)*N/2"}};
      list.push_back({{"name", to_string(t)}, {"comparisons", cost.at(t)}});
    }
    return {200, json{{"topologies", list}}.dump()};
  }

  HttpReply rank(std::string_view body) const {
    RankRequest req;
    std::shared_ptr<const Judge> judge;
    std::uint64_t judge_seed = 0;
    try {
      req = parse_rank_request(json::parse(body));
      if (const auto* name = std::get_if<std::string>(&req.judge)) {
        auto it = judges_.find(*name);
        if (it == judges_.end()) {
          return error_reply(400, "unknown judge '" + *name + "'", {{"unknown judge", *name}});
        }
        judge = it->second.judge;
        judge_seed = it->second.seed;
      } else {
        const auto& spec = std::get<JudgeSpec>(req.judge);
        if (spec.kind == JudgeKind::replay && spec.replay_log) {
          return error_reply(400, "inline replay judges must carry records, not a file path");
        }
        judge = make_judge(spec);
        judge_seed = spec.seed;
      }
    } catch (const RequestError& e) {
      return error_reply(400, e.what(), e.violations);
    } catch (const json::exception& e) {
      return error_reply(400, std::string("malformed request: ") + e.what());
    } catch (const Error& e) {
      return error_reply(400, e.what());
    }

    // The ranking runs on its own thread so a blown deadline can be answered
    // immediately; the job observes the stop token before every match.
    struct Job {
      RankRequest req;
      std::shared_ptr<const Judge> judge;
      std::stop_source stop;
      RankOptions options;
    };
    auto job = std::make_shared<Job>(Job{std::move(req), judge, {}, {}});
    job->options.seed = job->req.seed;
    job->options.swiss_rounds = job->req.swiss_rounds;
    job->options.parallelism = settings_.match_parallelism;
    job->options.stop = job->stop.get_token();

    std::packaged_task<RankingResult()> task([job] {
      return arena_rank::rank(job->req.topology, job->req.group, *job->judge, job->options);
    });
    std::future<RankingResult> pending = task.get_future();
    std::thread(std::move(task)).detach();

    if (pending.wait_for(settings_.deadline) != std::future_status::ready) {
      job->stop.request_stop();
      return error_reply(504, "deadline of " + std::to_string(settings_.deadline.count()) + " ms exceeded");
    }
    try {
      RankingResult result = pending.get();
      const AdvantageVector adv = ranks_to_advantages(result, job->req.epsilon.value_or(default_epsilon_));
      persist(result.matches);
      return {200, make_rank_response(result, adv, judge_seed, job->req.include_match_log).dump()};
    } catch (const JudgeError& e) {
      return error_reply(502, e.what(), {}, e.match_key);
    } catch (const DeadlineExceeded& e) {
      return error_reply(504, e.what());
    } catch (const PreconditionError& e) {
      return error_reply(400, e.what(), {{"precondition", e.reason}});
    } catch (const Error& e) {
      return error_reply(400, e.what());
    }
  }

  // Binds the HTTP server; port 0 picks a free port. Returns the bound port.
  int bind() {
    server_.new_task_queue = [n = settings_.max_concurrent_requests] {
      return new httplib::ThreadPool(std::max<std::size_t>(1, n));
    };
    auto reply = [](httplib::Response& res, const HttpReply& r) {
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    server_.Get("/v1/healthz", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
    server_.Get("/v1/topologies",
                [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, topologies()); });
    server_.Post("/v1/rank", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, rank(req.body));
    });
    if (settings_.port == 0) return server_.bind_to_any_port(settings_.host);
    return server_.bind_to_port(settings_.host, settings_.port) ? settings_.port : -1;
  }

  bool listen() { return server_.listen_after_bind(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

 private:
  struct ConfiguredJudge {
    std::shared_ptr<const Judge> judge;
    std::uint64_t seed = 0;
  };

  void persist(const std::vector<MatchRecord>& matches) const {
    if (!settings_.match_log_path) return;
    std::lock_guard lock(log_mutex_);
    std::ofstream out(*settings_.match_log_path, std::ios::app);
    write_match_log(out, matches);
  }

  ServiceSettings settings_;
  double default_epsilon_;
  std::map<std::string, ConfiguredJudge> judges_;
  httplib::Server server_;
  mutable std::mutex log_mutex_;
};

}  // namespace arena_rank
