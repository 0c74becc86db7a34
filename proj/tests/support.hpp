#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <functional>
#include <map>
#include <thread>
#include <optional>
#include <string>
#include <vector>

#include "arena_rank/arena_rank.hpp"

namespace arena_rank::testing {

inline Trajectory make_trajectory(std::string id, std::optional<double> utility, std::string query = "q") {
  Trajectory t;
  t.id = std::move(id);
  t.query = std::move(query);
  t.steps = {{"think", std::string("search(x)"), std::string("result")}};
  t.answer = "answer of " + t.id;
  t.latent_utility = utility;
  return t;
}

/// Group "g" with ids t0..t{n-1}, the given utilities, optional anchor.
inline TrajectoryGroup make_group(const std::vector<double>& utilities, std::optional<std::size_t> anchor = std::nullopt,
                                  std::string group_id = "g") {
  TrajectoryGroup g;
  g.group_id = std::move(group_id);
  g.query = "q";
  g.rubric = {"rubric text", "r1"};
  g.anchor_index = anchor;
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    g.trajectories.push_back(make_trajectory("t" + std::to_string(i), utilities[i]));
  }
  return g;
}

inline SimulatedJudge noiseless_judge(std::uint64_t seed = 1) { return SimulatedJudge(NoiseModel{}, seed); }

/// Judge whose directional answers come from a function of (first, second).
class ScriptedJudge : public Judge {
 public:
  using Fn = std::function<DirectionalScores(const Trajectory& first, const Trajectory& second)>;
  explicit ScriptedJudge(Fn fn) : fn_(std::move(fn)) {}

  /// Winner of each unordered pair decided by `beats(first_id, second_id)`;
  /// the winner gets 1 and the loser 0 in each direction.
  static ScriptedJudge from_relation(std::function<bool(const std::string&, const std::string&)> beats) {
    return ScriptedJudge([beats](const Trajectory& a, const Trajectory& b) {
      return beats(a.id, b.id) ? DirectionalScores{1.0, 0.0} : DirectionalScores{0.0, 1.0};
    });
  }

  DirectionalScores compare(const DirectionalCall& call) const override { return fn_(call.first, call.second); }
  std::string kind() const override { return "scripted"; }

 private:
  Fn fn_;
};

/// Scripted judge that prefers the higher latent utility, exact scores.
inline ScriptedJudge utility_judge() {
  return ScriptedJudge([](const Trajectory& a, const Trajectory& b) {
    return DirectionalScores{*a.latent_utility, *b.latent_utility};
  });
}

/// Distinct utilities in (0,1) in a random order.
inline std::vector<double> random_distinct_utilities(std::size_t n, rng::Stream& r) {
  std::vector<double> u;
  while (u.size() < n) {
    const double x = r.uniform();
    if (std::find(u.begin(), u.end(), x) == u.end()) u.push_back(x);
  }
  return u;
}

// Replay comparisons ignore who produced the recorded scores.
inline json without_provenance(const RankingResult& r) {
  json j = r;
  for (auto& m : j["matches"]) {
    m.erase("judge");
    m.erase("judge_seed");
  }
  return j;
}

/// Local HTTP endpoint at /judge on a free port, served until destruction.
class FakeJudgeServer {
 public:
  explicit FakeJudgeServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/judge", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeJudgeServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/judge"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace arena_rank::testing
