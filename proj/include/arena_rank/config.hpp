#pragma once

// Judge specifications and the application config file.
//
// The config is a JSON object with up to four sections:
//
//   { "judge":      { "kind": "simulated", "seed": 7, "noise": {...}, ... },
//     "topology":   { "name": "seeded-single-elim", "seed": 0, "epsilon": 1e-6, ... },
//     "service":    { "host": "127.0.0.1", "port": 8080, "judges": { "<name>": {judge} }, ... },
//     "experiment": { "kind": "fidelity" | "collapse", ... } }
//
// Unknown keys anywhere are rejected with the full list of offenders.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "arena_rank/judge.hpp"
#include "arena_rank/lab.hpp"
#include "arena_rank/remote_judge.hpp"
#include "arena_rank/serialization.hpp"
#include "arena_rank/tournaments.hpp"

namespace arena_rank {

inline constexpr const char* kConfigEnvVar = "ARENA_RANK_CONFIG";
inline constexpr const char* kDefaultConfigPath = "arena_rank.json";

enum class JudgeKind { simulated, replay, remote, pointwise_simulated };

inline const char* to_string(JudgeKind k) {
  switch (k) {
    case JudgeKind::simulated: return "simulated";
    case JudgeKind::replay: return "replay";
    case JudgeKind::remote: return "remote";
    case JudgeKind::pointwise_simulated: return "pointwise-simulated";
  }
  return "?";
}

inline std::optional<JudgeKind> parse_judge_kind(std::string_view s) {
  if (s == "simulated" || s == "sim") return JudgeKind::simulated;
  if (s == "replay") return JudgeKind::replay;
  if (s == "remote") return JudgeKind::remote;
  if (s == "pointwise-simulated" || s == "pointwise-sim") return JudgeKind::pointwise_simulated;
  return std::nullopt;
}

struct JudgeSpec {
  JudgeKind kind = JudgeKind::simulated;
  NoiseModel noise;
  std::optional<std::string> replay_log;     // path to a match log
  std::vector<MatchRecord> replay_records;   // inline alternative to replay_log
  RemoteSettings remote;
  std::uint64_t seed = 0;
};

/// Builds the backend described by `spec`; throws ConfigError when a field
/// the kind requires is missing.
inline std::shared_ptr<const Judge> make_judge(const JudgeSpec& spec) {
  switch (spec.kind) {
    case JudgeKind::simulated:
      return std::make_shared<SimulatedJudge>(spec.noise, spec.seed);
    case JudgeKind::pointwise_simulated:
      return std::make_shared<SimulatedJudge>(spec.noise, spec.seed, SimulatedJudge::Mode::pointwise_only);
    case JudgeKind::replay: {
      if (spec.replay_log) {
        std::ifstream in(*spec.replay_log);
        if (!in) throw ConfigError("cannot open replay log '" + *spec.replay_log + "'");
        return std::make_shared<ReplayJudge>(read_match_log(in), spec.seed);
      }
      if (spec.replay_records.empty()) throw ConfigError("replay judge needs replay_log or inline records");
      return std::make_shared<ReplayJudge>(spec.replay_records, spec.seed);
    }
    case JudgeKind::remote:
      if (spec.remote.endpoint.empty()) throw ConfigError("remote judge needs an endpoint");
      return std::make_shared<RemoteJudge>(spec.remote);
  }
  throw ConfigError("unknown judge kind");
}

// ---------------------------------------------------------------------------
// Config sections
// ---------------------------------------------------------------------------

struct TopologySettings {
  Topology name = Topology::seeded_single_elim;
  std::uint64_t seed = 0;
  std::optional<int> swiss_rounds;
  double epsilon = kDefaultAdvantageEpsilon;
  std::size_t parallelism = 1;
};

struct ServiceSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_concurrent_requests = 8;
  std::chrono::milliseconds deadline{60'000};
  std::size_t match_parallelism = 4;
  std::optional<std::string> match_log_path;
  std::map<std::string, JudgeSpec> judges;
};

enum class ExperimentKind { fidelity, collapse };

struct ExperimentSettings {
  ExperimentKind kind = ExperimentKind::fidelity;
  lab::GroupSpec group;  // fidelity: n, mean, spread, anchor policy, seed
  std::vector<Topology> topologies{std::begin(kAllTopologies), std::end(kAllTopologies)};
  lab::CollapseConfig collapse;  // collapse: spreads, n, mean, repetitions, seed
  std::size_t trials = 1000;
  std::size_t workers = 0;
};

struct AppConfig {
  JudgeSpec judge;
  TopologySettings topology;
  ServiceSettings service;
  ExperimentSettings experiment;
};

struct UnknownKeysError : ConfigError {
  explicit UnknownKeysError(std::vector<std::string> keys) : ConfigError(message(keys)), keys(std::move(keys)) {}
  std::vector<std::string> keys;

 private:
  static std::string message(const std::vector<std::string>& keys) {
    std::string m = "unknown config keys:";
    for (const auto& k : keys) m += " " + k;
    return m;
  }
};

namespace detail {

class ConfigReader {
 public:
  // Records keys of `obj` (at `path`) that are not in `known`.
  void check(const json& obj, const std::string& path, std::initializer_list<std::string_view> known) {
    if (!obj.is_object()) throw ConfigError(path + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (auto k : known) ok = ok || it.key() == k;
      if (!ok) unknown_.push_back(path.empty() ? it.key() : path + "." + it.key());
    }
  }
  void finish() const {
    if (!unknown_.empty()) throw UnknownKeysError(unknown_);
  }

 private:
  std::vector<std::string> unknown_;
};

inline Topology topology_from(const json& j) {
  const auto name = j.get<std::string>();
  auto t = parse_topology(name);
  if (!t) throw ConfigError("unknown topology '" + name + "'");
  return *t;
}

}  // namespace detail

inline JudgeSpec judge_spec_from_json(const json& j, detail::ConfigReader& reader, const std::string& path) {
  reader.check(j, path,
               {"kind", "seed", "noise", "replay_log", "records", "endpoint", "pointwise_endpoint", "timeout_ms",
                "max_attempts", "backoff_base_ms", "max_in_flight"});
  JudgeSpec spec;
  if (j.contains("kind")) {
    auto kind = parse_judge_kind(j.at("kind").get<std::string>());
    if (!kind) throw ConfigError(path + ".kind: unknown judge kind '" + j.at("kind").get<std::string>() + "'");
    spec.kind = *kind;
  }
  spec.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    reader.check(n, path + ".noise", {"gaussian_sigma", "position_bias", "quantization", "score_scale"});
    spec.noise.gaussian_sigma = n.value("gaussian_sigma", 0.0);
    spec.noise.position_bias = n.value("position_bias", 0.0);
    spec.noise.quantization = detail::get_optional<double>(n, "quantization");
    spec.noise.score_scale = n.value("score_scale", 1.0);
  }
  spec.replay_log = detail::get_optional<std::string>(j, "replay_log");
  if (j.contains("records")) spec.replay_records = j.at("records").get<std::vector<MatchRecord>>();
  spec.remote.endpoint = j.value("endpoint", std::string{});
  spec.remote.pointwise_endpoint = detail::get_optional<std::string>(j, "pointwise_endpoint");
  spec.remote.timeout = std::chrono::milliseconds(j.value("timeout_ms", 120'000));
  spec.remote.max_attempts = j.value("max_attempts", 3);
  spec.remote.backoff_base = std::chrono::milliseconds(j.value("backoff_base_ms", 500));
  spec.remote.max_in_flight = j.value("max_in_flight", 8);
  return spec;
}

inline JudgeSpec judge_spec_from_json(const json& j) {
  detail::ConfigReader reader;
  JudgeSpec spec = judge_spec_from_json(j, reader, "judge");
  reader.finish();
  return spec;
}

inline AppConfig config_from_json(const json& root) {
  detail::ConfigReader reader;
  reader.check(root, "", {"judge", "topology", "service", "experiment"});
  AppConfig cfg;

  if (root.contains("judge")) cfg.judge = judge_spec_from_json(root.at("judge"), reader, "judge");

  if (root.contains("topology")) {
    const json& t = root.at("topology");
    reader.check(t, "topology", {"name", "seed", "swiss_rounds", "epsilon", "parallelism"});
    if (t.contains("name")) cfg.topology.name = detail::topology_from(t.at("name"));
    cfg.topology.seed = t.value("seed", std::uint64_t{0});
    cfg.topology.swiss_rounds = detail::get_optional<int>(t, "swiss_rounds");
    cfg.topology.epsilon = t.value("epsilon", kDefaultAdvantageEpsilon);
    cfg.topology.parallelism = t.value("parallelism", std::size_t{1});
  }

  if (root.contains("service")) {
    const json& s = root.at("service");
    reader.check(s, "service",
                 {"host", "port", "max_concurrent_requests", "deadline_ms", "match_parallelism", "match_log_path",
                  "judges"});
    cfg.service.host = s.value("host", cfg.service.host);
    cfg.service.port = s.value("port", cfg.service.port);
    cfg.service.max_concurrent_requests = s.value("max_concurrent_requests", cfg.service.max_concurrent_requests);
    cfg.service.deadline = std::chrono::milliseconds(s.value("deadline_ms", 60'000));
    cfg.service.match_parallelism = s.value("match_parallelism", cfg.service.match_parallelism);
    cfg.service.match_log_path = detail::get_optional<std::string>(s, "match_log_path");
    if (s.contains("judges")) {
      for (auto it = s.at("judges").begin(); it != s.at("judges").end(); ++it) {
        cfg.service.judges[it.key()] = judge_spec_from_json(it.value(), reader, "service.judges." + it.key());
      }
    }
  }

  if (root.contains("experiment")) {
    const json& e = root.at("experiment");
    reader.check(e, "experiment",
                 {"kind", "n", "utility_mean", "utility_spread", "anchor_policy", "topologies", "spreads", "trials",
                  "repetitions", "seed", "workers"});
    ExperimentSettings& x = cfg.experiment;
    const std::string kind = e.value("kind", std::string("fidelity"));
    if (kind == "fidelity") {
      x.kind = ExperimentKind::fidelity;
    } else if (kind == "collapse") {
      x.kind = ExperimentKind::collapse;
    } else {
      throw ConfigError("experiment.kind must be 'fidelity' or 'collapse', got '" + kind + "'");
    }
    x.trials = e.value("trials", x.trials);
    x.workers = e.value("workers", x.workers);
    x.group.n = e.value("n", x.group.n);
    x.group.utility_mean = e.value("utility_mean", x.group.utility_mean);
    x.group.utility_spread = e.value("utility_spread", x.group.utility_spread);
    x.group.seed = e.value("seed", std::uint64_t{0});
    const std::string policy = e.value("anchor_policy", std::string("mean-utility"));
    if (policy == "mean-utility") {
      x.group.anchor_policy = lab::AnchorPolicy::mean_utility;
    } else if (policy == "sampled") {
      x.group.anchor_policy = lab::AnchorPolicy::sampled;
    } else {
      throw ConfigError("experiment.anchor_policy must be 'mean-utility' or 'sampled'");
    }
    if (e.contains("topologies")) {
      x.topologies.clear();
      for (const auto& t : e.at("topologies")) x.topologies.push_back(detail::topology_from(t));
    }
    x.collapse.n = x.group.n;
    x.collapse.utility_mean = x.group.utility_mean;
    x.collapse.seed = x.group.seed;
    x.collapse.trials = x.trials;
    x.collapse.workers = x.workers;
    x.collapse.repetitions = e.value("repetitions", lab::kDefaultRepetitions);
    if (e.contains("spreads")) x.collapse.spreads = e.at("spreads").get<std::vector<double>>();
  }
  reader.finish();
  return cfg;
}

/// Explicit path wins; otherwise $ARENA_RANK_CONFIG; otherwise the default
/// file name in the working directory.
inline std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& explicit_path) {
  if (explicit_path) return std::filesystem::path(*explicit_path);
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return std::filesystem::path(env);
  if (std::filesystem::exists(kDefaultConfigPath)) return std::filesystem::path(kDefaultConfigPath);
  return std::nullopt;
}

inline AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(root);
}

}  // namespace arena_rank
