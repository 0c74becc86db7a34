#pragma once

#include <cstdint>
#include <string>

namespace arena_rank {

/// Raw scores from one directional judge call, in presentation order.
struct DirectionalScores {
  double first = 0.0;
  double second = 0.0;

  bool operator==(const DirectionalScores&) const = default;
};

/// Bidirectional result for an ordered pair (a, b).
///   forward: a presented first  -> (score of a, score of b)
///   reverse: b presented first  -> (score of b, score of a)
/// score_a = forward.first + reverse.second, score_b = forward.second + reverse.first.
struct ScorePair {
  double score_a = 0.0;
  double score_b = 0.0;
  DirectionalScores forward;
  DirectionalScores reverse;

  static ScorePair combine(DirectionalScores fwd, DirectionalScores rev) {
    return {fwd.first + rev.second, fwd.second + rev.first, fwd, rev};
  }

  bool operator==(const ScorePair&) const = default;
};

struct MatchRecord {
  std::string match_key;
  std::string participant_a;
  std::string participant_b;
  ScorePair scores;
  std::string winner;
  std::string phase;
  int round = 0;
  bool tie_broken = false;  // scores were equal; winner picked by lower group index
  std::string judge;        // backend kind that produced the scores
  std::uint64_t judge_seed = 0;

  bool operator==(const MatchRecord&) const = default;
};

inline std::string make_match_key(std::string_view group_id, std::string_view topology,
                                  std::string_view phase, int round, int slot) {
  std::string key;
  key.reserve(group_id.size() + topology.size() + phase.size() + 16);
  key.append(group_id).append("/").append(topology).append("/").append(phase);
  key.append("/").append(std::to_string(round)).append("/").append(std::to_string(slot));
  return key;
}

}  // namespace arena_rank
