#pragma once

// JSON wire forms: group files (one trajectory per line), match logs (one
// MatchRecord per line), ranking results and advantage vectors.

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "arena_rank/advantage.hpp"
#include "arena_rank/core.hpp"
#include "arena_rank/judge.hpp"
#include "arena_rank/match.hpp"
#include "arena_rank/tournaments.hpp"

namespace arena_rank {

using json = nlohmann::json;

// A line of a line-delimited input could not be parsed.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line(line),
        column(column) {}
  std::size_t line;
  std::size_t column;
};

// A JSON value is well-formed but does not match the expected schema.
struct SchemaError : Error {
  using Error::Error;
};

namespace detail {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) throw SchemaError(std::string(what) + " has unknown field '" + it.key() + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

inline void to_json(json& j, const Step& s) {
  j = json{{"thought", s.thought}};
  detail::put_optional(j, "tool_call", s.tool_call);
  detail::put_optional(j, "tool_response", s.tool_response);
}

inline void from_json(const json& j, Step& s) {
  detail::reject_unknown(j, {"thought", "tool_call", "tool_response"}, "step");
  s.thought = j.at("thought").get<std::string>();
  s.tool_call = detail::get_optional<std::string>(j, "tool_call");
  s.tool_response = detail::get_optional<std::string>(j, "tool_response");
}

inline void to_json(json& j, const Trajectory& t) {
  j = json{{"id", t.id}, {"query", t.query}, {"steps", t.steps}, {"answer", t.answer}};
  detail::put_optional(j, "latent_utility", t.latent_utility);
  detail::put_optional(j, "likelihood_ratio", t.likelihood_ratio);
  detail::put_optional(j, "kl_estimate", t.kl_estimate);
}

inline void from_json(const json& j, Trajectory& t) {
  detail::reject_unknown(j,
                         {"id", "query", "steps", "answer", "latent_utility", "likelihood_ratio", "kl_estimate",
                          "anchor"},
                         "trajectory");
  t.id = j.at("id").get<std::string>();
  t.query = j.at("query").get<std::string>();
  t.steps = j.value("steps", std::vector<Step>{});
  t.answer = j.at("answer").get<std::string>();
  t.latent_utility = detail::get_optional<double>(j, "latent_utility");
  t.likelihood_ratio = detail::get_optional<double>(j, "likelihood_ratio");
  t.kl_estimate = detail::get_optional<double>(j, "kl_estimate");
}

inline void to_json(json& j, const Rubric& r) { j = json{{"text", r.text}, {"id", r.id}}; }

inline void from_json(const json& j, Rubric& r) {
  detail::reject_unknown(j, {"text", "id"}, "rubric");
  r.text = j.at("text").get<std::string>();
  r.id = j.value("id", std::string{});
}

/// Trajectory lines with the anchor flag folded in.
inline json group_lines(const TrajectoryGroup& g) {
  json lines = json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    json line = g.trajectories[i];
    if (g.anchor_index == i) line["anchor"] = true;
    lines.push_back(std::move(line));
  }
  return lines;
}

inline TrajectoryGroup group_from_lines(const json& lines, std::string group_id, Rubric rubric,
                                        std::optional<std::string> query = std::nullopt) {
  TrajectoryGroup g;
  g.group_id = std::move(group_id);
  g.rubric = std::move(rubric);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const json& line = lines[i];
    if (line.value("anchor", false)) {
      if (g.anchor_index) throw SchemaError("more than one trajectory flags anchor: true");
      g.anchor_index = i;
    }
    g.trajectories.push_back(line.get<Trajectory>());
  }
  if (query) {
    g.query = *query;
  } else if (!g.trajectories.empty()) {
    g.query = g.trajectories.front().query;
  }
  return g;
}

inline void to_json(json& j, const TrajectoryGroup& g) {
  j = json{{"group_id", g.group_id}, {"query", g.query}, {"rubric", g.rubric}, {"trajectories", group_lines(g)}};
}

inline void from_json(const json& j, TrajectoryGroup& g) {
  detail::reject_unknown(j, {"group_id", "query", "rubric", "trajectories"}, "group");
  g = group_from_lines(j.at("trajectories"), j.value("group_id", std::string("group")), j.at("rubric").get<Rubric>(),
                       detail::get_optional<std::string>(j, "query"));
}

/// Reads a group file: one JSON trajectory per nonblank line.
inline TrajectoryGroup read_group_jsonl(std::istream& in, std::string group_id, Rubric rubric) {
  json lines = json::array();
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json line = json::parse(text);
      if (!line.is_object()) throw ParseError("expected a JSON object", line_no, 1);
      (void)line.get<Trajectory>();
      lines.push_back(std::move(line));
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), line_no, e.byte);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no, 1);
    } catch (const SchemaError& e) {
      throw ParseError(e.what(), line_no, 1);
    }
  }
  try {
    return group_from_lines(lines, std::move(group_id), std::move(rubric));
  } catch (const SchemaError& e) {
    throw ParseError(e.what(), line_no, 1);
  }
}

inline void write_group_jsonl(std::ostream& out, const TrajectoryGroup& g) {
  for (const auto& line : group_lines(g)) out << line.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Matches and rankings
// ---------------------------------------------------------------------------

inline void to_json(json& j, const DirectionalScores& s) { j = json::array({s.first, s.second}); }
inline void from_json(const json& j, DirectionalScores& s) {
  s.first = j.at(0).get<double>();
  s.second = j.at(1).get<double>();
}

inline void to_json(json& j, const ScorePair& s) {
  j = json{{"score_a", s.score_a}, {"score_b", s.score_b}, {"forward", s.forward}, {"reverse", s.reverse}};
}
inline void from_json(const json& j, ScorePair& s) {
  s.score_a = j.at("score_a").get<double>();
  s.score_b = j.at("score_b").get<double>();
  s.forward = j.at("forward").get<DirectionalScores>();
  s.reverse = j.at("reverse").get<DirectionalScores>();
}

inline void to_json(json& j, const MatchRecord& m) {
  j = json{{"match_key", m.match_key}, {"participant_a", m.participant_a}, {"participant_b", m.participant_b},
           {"scores", m.scores},        {"winner", m.winner},               {"phase", m.phase},
           {"round", m.round},          {"tie_broken", m.tie_broken},       {"judge", m.judge},
           {"judge_seed", m.judge_seed}};
}

inline void from_json(const json& j, MatchRecord& m) {
  m.match_key = j.at("match_key").get<std::string>();
  m.participant_a = j.at("participant_a").get<std::string>();
  m.participant_b = j.at("participant_b").get<std::string>();
  m.scores = j.at("scores").get<ScorePair>();
  m.winner = j.at("winner").get<std::string>();
  m.phase = j.at("phase").get<std::string>();
  m.round = j.at("round").get<int>();
  m.tie_broken = j.value("tie_broken", false);
  m.judge = j.value("judge", std::string{});
  m.judge_seed = j.value("judge_seed", std::uint64_t{0});
}

inline void write_match_log(std::ostream& out, const std::vector<MatchRecord>& log) {
  for (const auto& m : log) out << json(m).dump() << '\n';
}

inline std::vector<MatchRecord> read_match_log(std::istream& in) {
  std::vector<MatchRecord> log;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      log.push_back(json::parse(text).get<MatchRecord>());
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), line_no, e.byte);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no, 1);
    } catch (const SchemaError& e) {
      throw ParseError(e.what(), line_no, 1);
    }
  }
  return log;
}

inline void to_json(json& j, const SwissStanding& s) {
  j = json{{"id", s.id},
           {"wins", s.wins},
           {"buchholz", s.buchholz},
           {"accumulated_score", s.accumulated_score},
           {"opponents", s.opponents}};
}

inline void to_json(json& j, const RankingResult& r) {
  j = json{{"topology", r.topology},
           {"seed", r.seed},
           {"ids", r.ids},
           {"ranks", r.ranks},
           {"scores", r.scores},
           {"accumulated_scores", r.accumulated_scores},
           {"tiers", r.tiers},
           {"matches", r.matches},
           {"comparison_count", r.comparison_count},
           {"tie_break_applied", r.tie_break_applied}};
  if (!r.standings.empty()) j["standings"] = r.standings;
}

inline void to_json(json& j, const AdvantageVector& a) {
  j = json{{"rewards", a.rewards},
           {"advantages", a.advantages},
           {"mean_reward", a.mean_reward},
           {"std_reward", a.std_reward},
           {"epsilon", a.epsilon}};
}

inline void to_json(json& j, const NoiseModel& n) {
  j = json{{"gaussian_sigma", n.gaussian_sigma}, {"position_bias", n.position_bias}, {"score_scale", n.score_scale}};
  detail::put_optional(j, "quantization", n.quantization);
}

inline void from_json(const json& j, NoiseModel& n) {
  detail::reject_unknown(j, {"gaussian_sigma", "position_bias", "quantization", "score_scale"}, "noise");
  n.gaussian_sigma = j.value("gaussian_sigma", 0.0);
  n.position_bias = j.value("position_bias", 0.0);
  n.quantization = detail::get_optional<double>(j, "quantization");
  n.score_scale = j.value("score_scale", 1.0);
}

}  // namespace arena_rank
