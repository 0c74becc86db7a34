#pragma once

// HTTP judge backend.
//
//   POST <endpoint>  {"query", "rubric", "trajectory_a": {"steps", "answer"},
//                     "trajectory_b": {"steps", "answer"}}
//   200              {"score_a": number, "score_b": number}
//
// One request per direction; trajectory_a is the first-presented one. Failed
// attempts are retried with exponential backoff.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "arena_rank/judge.hpp"
#include "arena_rank/serialization.hpp"

namespace arena_rank {

struct RemoteSettings {
  std::string endpoint;                          // http://host:port/path
  std::optional<std::string> pointwise_endpoint; // optional {query, rubric, trajectory} -> {score}
  std::chrono::milliseconds timeout{120'000};    // per attempt
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{500};
  double backoff_factor = 2.0;
  std::ptrdiff_t max_in_flight = 8;

  bool operator==(const RemoteSettings&) const = default;
};

namespace detail {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("remote judge endpoint must be an http URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

inline json trajectory_payload(const Trajectory& t) { return json{{"steps", t.steps}, {"answer", t.answer}}; }

}  // namespace detail

class RemoteJudge : public Judge {
 public:
  explicit RemoteJudge(RemoteSettings settings)
      : settings_(std::move(settings)),
        url_(detail::split_url(settings_.endpoint)),
        in_flight_(std::max<std::ptrdiff_t>(1, settings_.max_in_flight)) {
    if (settings_.max_attempts < 1) throw ConfigError("remote judge max_attempts must be >= 1");
    if (settings_.pointwise_endpoint) pointwise_url_ = detail::split_url(*settings_.pointwise_endpoint);
  }

  DirectionalScores compare(const DirectionalCall& call) const override {
    const json body{{"query", call.query},
                    {"rubric", call.rubric.text},
                    {"trajectory_a", detail::trajectory_payload(call.first)},
                    {"trajectory_b", detail::trajectory_payload(call.second)}};
    const json reply = post(url_, body, call.match_key, call.direction);
    try {
      return {reply.at("score_a").get<double>(), reply.at("score_b").get<double>()};
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed judge reply (") + to_string(call.direction) + "): " + e.what(),
                           std::string(call.match_key), call.direction);
    }
  }

  double pointwise(std::string_view query, const Trajectory& t, const Rubric& rubric,
                   std::string_view call_key) const override {
    if (!pointwise_url_) throw ConfigError("remote judge has no pointwise_endpoint configured");
    const json body{{"query", query}, {"rubric", rubric.text}, {"trajectory", detail::trajectory_payload(t)}};
    const json reply = post(*pointwise_url_, body, call_key, Direction::forward);
    try {
      return reply.at("score").get<double>();
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed pointwise reply: ") + e.what(), std::string(call_key),
                           Direction::forward);
    }
  }

  std::string kind() const override { return "remote"; }
  bool deterministic() const override { return false; }
  const RemoteSettings& settings() const { return settings_; }

 private:
  json post(const detail::Url& url, const json& body, std::string_view key, Direction direction) const {
    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 1; attempt <= settings_.max_attempts; ++attempt) {
      if (attempt > 1) {
        const double scale = std::pow(settings_.backoff_factor, attempt - 2);
        std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(
            settings_.backoff_base * scale));
      }
      in_flight_.acquire();
      httplib::Result res = [&] {
        httplib::Client client(url.origin);
        client.set_connection_timeout(settings_.timeout);
        client.set_read_timeout(settings_.timeout);
        client.set_write_timeout(settings_.timeout);
        return client.Post(url.path, payload, "application/json");
      }();
      in_flight_.release();

      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      try {
        return json::parse(res->body);
      } catch (const json::parse_error& e) {
        last_error = std::string("unparseable body: ") + e.what();
      }
    }
    throw TransportError("remote judge failed on the " + std::string(to_string(direction)) + " call for '" +
                             std::string(key) + "' after " + std::to_string(settings_.max_attempts) +
                             " attempt(s): " + last_error,
                         std::string(key), direction);
  }

  RemoteSettings settings_;
  detail::Url url_;
  std::optional<detail::Url> pointwise_url_;
  mutable std::counting_semaphore<> in_flight_;
};

}  // namespace arena_rank
