#pragma once

// Ranking topologies over one trajectory group.
//
// Every topology maps (group, judge, options) to a RankingResult holding a
// total order, the full match log and the exact number of judge comparisons.
// Matches within one round are independent and may run concurrently; results
// are always applied in bracket order so the output is schedule-invariant.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <exception>
#include <map>
#include <numeric>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "arena_rank/core.hpp"
#include "arena_rank/judge.hpp"
#include "arena_rank/match.hpp"
#include "arena_rank/random.hpp"

namespace arena_rank {

enum class Topology { round_robin, anchor, seeded_single_elim, double_elim, swiss };

inline constexpr Topology kAllTopologies[] = {Topology::round_robin, Topology::anchor,
                                              Topology::seeded_single_elim, Topology::double_elim,
                                              Topology::swiss};

inline const char* to_string(Topology t) {
  switch (t) {
    case Topology::round_robin: return "round-robin";
    case Topology::anchor: return "anchor";
    case Topology::seeded_single_elim: return "seeded-single-elim";
    case Topology::double_elim: return "double-elim";
    case Topology::swiss: return "swiss";
  }
  return "?";
}

inline std::optional<Topology> parse_topology(std::string_view name) {
  for (Topology t : kAllTopologies) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

struct DeadlineExceeded : Error {
  using Error::Error;
};

struct RankOptions {
  std::uint64_t seed = 0;            // shuffle seed (double-elim, swiss)
  std::optional<int> swiss_rounds;   // default ceil(log2 N)
  std::size_t parallelism = 1;       // concurrent matches within a round
  std::stop_token stop;              // checked before every match
};

struct SwissStanding {
  std::string id;
  int wins = 0;
  int buchholz = 0;
  double accumulated_score = 0.0;
  std::vector<std::string> opponents;

  bool operator==(const SwissStanding&) const = default;
};

struct RankingResult {
  std::string topology;
  std::uint64_t seed = 0;
  std::vector<std::string> ids;            // group order
  std::vector<int> ranks;                  // group order, 0 = best
  std::vector<double> scores;              // the key the final order sorts on, group order
  std::vector<double> accumulated_scores;  // V, group order
  std::vector<std::vector<std::string>> tiers;  // best tier first; elimination topologies only
  std::vector<SwissStanding> standings;         // swiss only, group order
  std::vector<MatchRecord> matches;
  std::size_t comparison_count = 0;
  bool tie_break_applied = false;  // some adjacent ranks were decided by group index

  std::size_t size() const { return ids.size(); }

  int rank_of(std::string_view id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == id) return ranks[i];
    }
    throw ContractError("no trajectory '" + std::string(id) + "' in ranking");
  }

  // Ids best-first.
  std::vector<std::string> order() const {
    std::vector<std::string> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out[static_cast<std::size_t>(ranks[i])] = ids[i];
    return out;
  }

  bool operator==(const RankingResult&) const = default;
};

/// Exact number of judge comparisons a topology performs for group size n.
inline std::size_t comparison_budget(Topology topology, std::size_t n) {
  auto fail = [&](const std::string& why) -> std::size_t { throw PreconditionError(to_string(topology), why); };
  if (n < 2) return fail("group size must be >= 2");
  switch (topology) {
    case Topology::round_robin: return n * (n - 1) / 2;
    case Topology::anchor: return n - 1;
    case Topology::seeded_single_elim: return 2 * n - 2;
    case Topology::double_elim:
      if (!std::has_single_bit(n)) return fail("group size must be a power of two");
      return 2 * n - 2;
    case Topology::swiss:
      if (n % 2 != 0) return fail("group size must be even");
      return static_cast<std::size_t>(std::bit_width(n - 1)) * n / 2;
  }
  return fail("unknown topology");
}

inline std::size_t comparison_budget(std::string_view topology, std::size_t n) {
  auto t = parse_topology(topology);
  if (!t) throw ContractError("unknown topology '" + std::string(topology) + "'");
  return comparison_budget(*t, n);
}

namespace detail {

struct PendingMatch {
  std::size_t a;
  std::size_t b;
  std::string match_key;
  std::string phase;
  int round;
};

struct Outcome {
  ScorePair scores;
  std::size_t winner;
  std::size_t loser;
  bool tie;
};

// Per-invocation tournament state: the group, the judge, and the match log.
class Arena {
 public:
  Arena(const TrajectoryGroup& group, const Judge& judge, Topology topology, const RankOptions& options)
      : group_(group), judge_(judge), topology_(topology), options_(options) {
    const ValidationReport report = validate_group(group);
    if (!report.empty()) {
      std::string why = "invalid group:";
      for (const auto& v : report) why += " [" + v.code + "] " + v.message + ";";
      throw PreconditionError(to_string(topology), why);
    }
    v_.assign(group.size(), 0.0);
  }

  std::size_t n() const { return group_.size(); }
  const TrajectoryGroup& group() const { return group_; }
  std::vector<double>& accumulated() { return v_; }

  void require(bool ok, const std::string& reason) const {
    if (!ok) throw PreconditionError(to_string(topology_), reason);
  }

  std::string key(std::string_view phase, int round, int slot, const char* topology = nullptr) const {
    return make_match_key(group_.group_id, topology ? topology : to_string(topology_), phase, round, slot);
  }

  // Evaluates a batch of independent matches and logs them in batch order.
  std::vector<Outcome> play(const std::vector<PendingMatch>& batch) {
    std::vector<ScorePair> scores(batch.size());
    std::vector<std::exception_ptr> errors(batch.size());

    auto run_one = [&](std::size_t i) {
      try {
        if (options_.stop.stop_requested()) {
          throw DeadlineExceeded("ranking cancelled before match '" + batch[i].match_key + "'");
        }
        const PendingMatch& m = batch[i];
        scores[i] = evaluate_pair(group_.query, group_.trajectories[m.a], group_.trajectories[m.b],
                                  group_.rubric, judge_, m.match_key);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    };

    const std::size_t workers = std::min(options_.parallelism, batch.size());
    if (workers <= 1) {
      for (std::size_t i = 0; i < batch.size(); ++i) {
        run_one(i);
        if (errors[i]) break;
      }
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < batch.size(); i = next++) run_one(i);
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    std::vector<Outcome> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const PendingMatch& m = batch[i];
      const ScorePair& s = scores[i];
      const bool tie = s.score_a == s.score_b;
      std::size_t winner = s.score_a > s.score_b ? m.a : m.b;
      if (tie) winner = std::min(m.a, m.b);
      const std::size_t loser = winner == m.a ? m.b : m.a;
      out.push_back({s, winner, loser, tie});

      MatchRecord rec;
      rec.match_key = m.match_key;
      rec.participant_a = group_.trajectories[m.a].id;
      rec.participant_b = group_.trajectories[m.b].id;
      rec.scores = s;
      rec.winner = group_.trajectories[winner].id;
      rec.phase = m.phase;
      rec.round = m.round;
      rec.tie_broken = tie;
      rec.judge = judge_.kind();
      rec.judge_seed = judge_.seed();
      matches_.push_back(std::move(rec));
    }
    return out;
  }

  // Adds combined scores of played matches to V.
  void accumulate(const std::vector<PendingMatch>& batch, const std::vector<Outcome>& outcomes) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      v_[batch[i].a] += outcomes[i].scores.score_a;
      v_[batch[i].b] += outcomes[i].scores.score_b;
    }
  }

  RankingResult finish(const std::vector<std::size_t>& order, std::vector<double> scores, bool tie_break) {
    RankingResult r;
    r.topology = to_string(topology_);
    r.seed = options_.seed;
    r.ids.reserve(n());
    for (const auto& t : group_.trajectories) r.ids.push_back(t.id);
    r.ranks.assign(n(), -1);
    for (std::size_t k = 0; k < order.size(); ++k) r.ranks[order[k]] = static_cast<int>(k);
    r.scores = std::move(scores);
    r.accumulated_scores = v_;
    r.matches = std::move(matches_);
    r.comparison_count = r.matches.size();
    r.tie_break_applied = tie_break;
    return r;
  }

 private:
  const TrajectoryGroup& group_;
  const Judge& judge_;
  Topology topology_;
  const RankOptions& options_;
  std::vector<double> v_;
  std::vector<MatchRecord> matches_;
};

// Sorts `members` by descending key, ascending group index. Returns true when
// two adjacent members shared a key (the index decided their order).
inline bool sort_by_key(std::vector<std::size_t>& members, const std::vector<double>& key) {
  std::sort(members.begin(), members.end(), [&](std::size_t x, std::size_t y) {
    if (key[x] != key[y]) return key[x] > key[y];
    return x < y;
  });
  for (std::size_t k = 1; k < members.size(); ++k) {
    if (key[members[k - 1]] == key[members[k]]) return true;
  }
  return false;
}

struct AnchorPhase {
  std::vector<double> scores;       // s_i for explorers, mean anchor score for the anchor
  std::vector<std::size_t> order;   // best-first
  bool tie_break = false;
};

// Every explorer vs the anchor once. Match keys always use the "anchor"
// topology label so seeded single-elimination seeds reproduce anchor_rank.
inline AnchorPhase run_anchor_phase(Arena& arena) {
  const std::size_t n = arena.n();
  arena.require(n >= 2, "group size must be >= 2");
  arena.require(arena.group().anchor_index.has_value(), "group has no anchor trajectory");
  const std::size_t anc = *arena.group().anchor_index;

  std::vector<PendingMatch> batch;
  int slot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == anc) continue;
    batch.push_back({i, anc, arena.key("seeding", 0, slot, to_string(Topology::anchor)), "seeding", 0});
    ++slot;
  }
  const auto outcomes = arena.play(batch);

  AnchorPhase phase;
  phase.scores.assign(n, 0.0);
  double anchor_sum = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    phase.scores[batch[k].a] = outcomes[k].scores.score_a;
    anchor_sum += outcomes[k].scores.score_b;
  }
  phase.scores[anc] = anchor_sum / static_cast<double>(n - 1);
  phase.order.resize(n);
  std::iota(phase.order.begin(), phase.order.end(), std::size_t{0});
  phase.tie_break = sort_by_key(phase.order, phase.scores);
  return phase;
}

// Orders tiers (best first) internally by V and flattens them.
inline bool flatten_tiers(std::vector<std::vector<std::size_t>>& tiers, const std::vector<double>& v,
                          std::vector<std::size_t>& order) {
  bool tie = false;
  for (auto& tier : tiers) {
    tie = sort_by_key(tier, v) || tie;
    order.insert(order.end(), tier.begin(), tier.end());
  }
  return tie;
}

inline std::vector<std::vector<std::string>> tier_ids(const TrajectoryGroup& g,
                                                      const std::vector<std::vector<std::size_t>>& tiers) {
  std::vector<std::vector<std::string>> out;
  for (const auto& tier : tiers) {
    auto& ids = out.emplace_back();
    for (std::size_t i : tier) ids.push_back(g.trajectories[i].id);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Round-robin
// ---------------------------------------------------------------------------

/// Every unordered pair once. Score = normalized win rate, a tied match
/// credits half a win to each side.
inline RankingResult round_robin(const TrajectoryGroup& group, const Judge& judge,
                                 const RankOptions& options = {}) {
  detail::Arena arena(group, judge, Topology::round_robin, options);
  const std::size_t n = arena.n();

  std::vector<detail::PendingMatch> batch;
  int slot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      batch.push_back({i, j, arena.key("round-robin", 0, slot++), "round-robin", 0});
    }
  }
  const auto outcomes = arena.play(batch);
  arena.accumulate(batch, outcomes);

  std::vector<double> wins(n, 0.0);
  for (const auto& o : outcomes) {
    if (o.tie) {
      wins[o.winner] += 0.5;
      wins[o.loser] += 0.5;
    } else {
      wins[o.winner] += 1.0;
    }
  }
  for (double& w : wins) w /= static_cast<double>(n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool tie = detail::sort_by_key(order, wins);
  return arena.finish(order, std::move(wins), tie);
}

// ---------------------------------------------------------------------------
// Anchor-based ranking
// ---------------------------------------------------------------------------

inline RankingResult anchor_rank(const TrajectoryGroup& group, const Judge& judge,
                                 const RankOptions& options = {}) {
  detail::Arena arena(group, judge, Topology::anchor, options);
  detail::AnchorPhase phase = detail::run_anchor_phase(arena);
  arena.accumulated() = phase.scores;
  return arena.finish(phase.order, std::move(phase.scores), phase.tie_break);
}

// ---------------------------------------------------------------------------
// Seeded single-elimination
// ---------------------------------------------------------------------------

/// Bracket slot order for `slots` (a power of two) seeds, as 0-based seed
/// indices: pair seed k with seed slots-k+1, odd k filling from the front
/// and even k from the back. For 8 slots: 1 8 3 6 4 5 2 7 (1-based).
inline std::vector<std::size_t> bracket_order(std::size_t slots) {
  std::vector<std::size_t> b(slots);
  if (slots < 2) {
    if (slots == 1) b[0] = 0;
    return b;
  }
  std::size_t head = 0;
  std::size_t tail = slots - 2;
  for (std::size_t k = 0; k < slots / 2; ++k) {
    const std::size_t high = k;
    const std::size_t low = slots - 1 - k;
    if (k % 2 == 0) {
      b[head] = high;
      b[head + 1] = low;
      head += 2;
    } else {
      b[tail] = high;
      b[tail + 1] = low;
      tail -= 2;
    }
  }
  return b;
}

inline RankingResult seeded_single_elim(const TrajectoryGroup& group, const Judge& judge,
                                        const RankOptions& options = {}) {
  detail::Arena arena(group, judge, Topology::seeded_single_elim, options);
  const std::size_t n = arena.n();

  // Phase 1: anchor seeding; V starts at the seeding scores.
  detail::AnchorPhase seeding = detail::run_anchor_phase(arena);
  std::vector<double>& v = arena.accumulated();
  v = seeding.scores;

  // Phase 2: bracket. Seeds past N are byes.
  const std::size_t slots = std::bit_ceil(n);
  std::vector<std::optional<std::size_t>> bracket;
  for (std::size_t seed : bracket_order(slots)) {
    bracket.push_back(seed < n ? std::optional(seeding.order[seed]) : std::nullopt);
  }

  std::vector<std::vector<std::size_t>> losers_by_round;
  for (int round = 1; bracket.size() > 1; ++round) {
    std::vector<detail::PendingMatch> batch;
    std::vector<std::size_t> batch_slot;
    std::vector<std::optional<std::size_t>> next(bracket.size() / 2);
    for (std::size_t k = 0; k < bracket.size() / 2; ++k) {
      const auto& x = bracket[2 * k];
      const auto& y = bracket[2 * k + 1];
      if (x && y) {
        batch.push_back({*x, *y, arena.key("winners-bracket", round, static_cast<int>(k)),
                         "winners-bracket", round});
        batch_slot.push_back(k);
      } else {
        next[k] = x ? x : y;  // bye
      }
    }
    const auto outcomes = arena.play(batch);
    arena.accumulate(batch, outcomes);
    std::vector<std::size_t> losers;
    for (std::size_t m = 0; m < outcomes.size(); ++m) {
      next[batch_slot[m]] = outcomes[m].winner;
      losers.push_back(outcomes[m].loser);
    }
    if (!losers.empty()) losers_by_round.push_back(std::move(losers));
    bracket = std::move(next);
  }

  // Phase 3: champion first, then losers of each round from latest to earliest.
  std::vector<std::vector<std::size_t>> tiers;
  tiers.push_back({*bracket.front()});
  for (auto it = losers_by_round.rbegin(); it != losers_by_round.rend(); ++it) tiers.push_back(*it);

  std::vector<std::size_t> order;
  const bool tie = detail::flatten_tiers(tiers, v, order);
  RankingResult r = arena.finish(order, v, tie || seeding.tie_break);
  r.tiers = detail::tier_ids(group, tiers);
  return r;
}

// ---------------------------------------------------------------------------
// Double-elimination
// ---------------------------------------------------------------------------

/// Random seeding, winners and losers brackets with drop-down routing, one
/// grand final without reset: (N-1) + (N-2) + 1 = 2N-2 matches. A trajectory
/// is eliminated by its second loss; elimination round defines its tier.
inline RankingResult double_elim(const TrajectoryGroup& group, const Judge& judge, std::uint64_t seed,
                                 RankOptions options = {}) {
  options.seed = seed;
  detail::Arena arena(group, judge, Topology::double_elim, options);
  const std::size_t n = arena.n();
  arena.require(n >= 2 && std::has_single_bit(n), "group size must be a power of two, got " + std::to_string(n));

  std::vector<std::size_t> winners(n);
  std::iota(winners.begin(), winners.end(), std::size_t{0});
  rng::Stream(rng::mix(seed, "double-elim")).shuffle(winners);

  std::vector<std::vector<std::size_t>> eliminated;  // in elimination order
  std::vector<std::size_t> losers;
  int lb_round = 0;

  auto play_round = [&](std::vector<detail::PendingMatch> batch, std::vector<std::size_t>& advance,
                        std::vector<std::size_t>& fall) {
    const auto outcomes = arena.play(batch);
    arena.accumulate(batch, outcomes);
    advance.clear();
    fall.clear();
    for (const auto& o : outcomes) {
      advance.push_back(o.winner);
      fall.push_back(o.loser);
    }
  };

  auto losers_internal = [&] {
    if (losers.size() < 2) return;
    ++lb_round;
    std::vector<detail::PendingMatch> batch;
    for (std::size_t k = 0; k < losers.size() / 2; ++k) {
      batch.push_back({losers[2 * k], losers[2 * k + 1],
                       arena.key("losers-bracket", lb_round, static_cast<int>(k)), "losers-bracket", lb_round});
    }
    std::vector<std::size_t> out;
    play_round(std::move(batch), losers, out);
    eliminated.push_back(out);
  };

  for (int round = 1; winners.size() > 1; ++round) {
    std::vector<detail::PendingMatch> batch;
    for (std::size_t k = 0; k < winners.size() / 2; ++k) {
      batch.push_back({winners[2 * k], winners[2 * k + 1],
                       arena.key("winners-bracket", round, static_cast<int>(k)), "winners-bracket", round});
    }
    std::vector<std::size_t> dropped;
    play_round(std::move(batch), winners, dropped);

    if (round == 1) {
      losers = dropped;
    } else {
      // Alternate drop-in order so bracket halves cross and early rematches are avoided.
      if (round % 2 == 0) std::reverse(dropped.begin(), dropped.end());
      ++lb_round;
      std::vector<detail::PendingMatch> drop_in;
      for (std::size_t k = 0; k < losers.size(); ++k) {
        drop_in.push_back({losers[k], dropped[k], arena.key("losers-bracket", lb_round, static_cast<int>(k)),
                           "losers-bracket", lb_round});
      }
      std::vector<std::size_t> out;
      play_round(std::move(drop_in), losers, out);
      eliminated.push_back(out);
    }
    losers_internal();
  }

  std::vector<detail::PendingMatch> final_match{
      {winners.front(), losers.front(), arena.key("grand-final", 1, 0), "grand-final", 1}};
  std::vector<std::size_t> champion, runner_up;
  play_round(std::move(final_match), champion, runner_up);

  std::vector<std::vector<std::size_t>> tiers{champion, runner_up};
  for (auto it = eliminated.rbegin(); it != eliminated.rend(); ++it) tiers.push_back(*it);

  std::vector<std::size_t> order;
  const bool tie = detail::flatten_tiers(tiers, arena.accumulated(), order);
  RankingResult r = arena.finish(order, arena.accumulated(), tie);
  r.tiers = detail::tier_ids(group, tiers);
  return r;
}

// ---------------------------------------------------------------------------
// Swiss system
// ---------------------------------------------------------------------------

namespace detail {

// Pairs `pending` (already in pairing priority order) so that nobody meets a
// past opponent; the first entry takes the earliest compatible partner and
// the search backtracks only when that leaves the rest unpairable.
inline bool pair_without_rematch(std::vector<std::size_t>& pending,
                                 const std::vector<std::vector<bool>>& met,
                                 std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  if (pending.empty()) return true;
  const std::size_t p = pending.front();
  for (std::size_t k = 1; k < pending.size(); ++k) {
    const std::size_t q = pending[k];
    if (met[p][q]) continue;
    std::vector<std::size_t> rest;
    rest.reserve(pending.size() - 2);
    for (std::size_t j = 1; j < pending.size(); ++j) {
      if (j != k) rest.push_back(pending[j]);
    }
    pairs.emplace_back(p, q);
    if (pair_without_rematch(rest, met, pairs)) return true;
    pairs.pop_back();
  }
  return false;
}

}  // namespace detail

inline RankingResult swiss(const TrajectoryGroup& group, const Judge& judge, std::optional<int> rounds,
                           std::uint64_t seed, RankOptions options = {}) {
  options.seed = seed;
  detail::Arena arena(group, judge, Topology::swiss, options);
  const std::size_t n = arena.n();
  arena.require(n >= 2 && n % 2 == 0, "group size must be even, got " + std::to_string(n));
  const int k_rounds = rounds.value_or(std::bit_width(n - 1));
  arena.require(k_rounds >= 1 && static_cast<std::size_t>(k_rounds) <= n / 2,
                "rounds must lie in [1, N/2] so that a rematch-free pairing always exists");

  std::vector<std::size_t> shuffled(n);
  std::iota(shuffled.begin(), shuffled.end(), std::size_t{0});
  rng::Stream(rng::mix(seed, "swiss")).shuffle(shuffled);
  std::vector<std::size_t> position(n);
  for (std::size_t p = 0; p < n; ++p) position[shuffled[p]] = p;

  std::vector<int> wins(n, 0);
  std::vector<std::vector<std::size_t>> opponents(n);
  std::vector<std::vector<bool>> met(n, std::vector<bool>(n, false));

  for (int round = 1; round <= k_rounds; ++round) {
    // Score groups: wins descending, shuffled order inside a group.
    std::vector<std::size_t> pending = shuffled;
    std::stable_sort(pending.begin(), pending.end(),
                     [&](std::size_t x, std::size_t y) { return wins[x] > wins[y]; });
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (!detail::pair_without_rematch(pending, met, pairs)) {
      throw Error("swiss: no rematch-free pairing in round " + std::to_string(round));
    }

    const std::string phase = "swiss-round-" + std::to_string(round);
    std::vector<detail::PendingMatch> batch;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      batch.push_back({pairs[k].first, pairs[k].second, arena.key(phase, round, static_cast<int>(k)), phase, round});
    }
    const auto outcomes = arena.play(batch);
    arena.accumulate(batch, outcomes);
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      const auto [a, b] = pairs[k];
      ++wins[outcomes[k].winner];
      opponents[a].push_back(b);
      opponents[b].push_back(a);
      met[a][b] = met[b][a] = true;
    }
  }

  std::vector<int> buchholz(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o : opponents[i]) buchholz[i] += wins[o];
  }
  const std::vector<double>& v = arena.accumulated();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto composite = [&](std::size_t i) { return std::tuple(wins[i], buchholz[i], v[i]); };
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (composite(x) != composite(y)) return composite(x) > composite(y);
    return x < y;
  });
  bool tie = false;
  for (std::size_t k = 1; k < n; ++k) tie = tie || composite(order[k - 1]) == composite(order[k]);

  std::vector<SwissStanding> standings(n);
  for (std::size_t i = 0; i < n; ++i) {
    standings[i].id = group.trajectories[i].id;
    standings[i].wins = wins[i];
    standings[i].buchholz = buchholz[i];
    standings[i].accumulated_score = v[i];
    for (std::size_t o : opponents[i]) standings[i].opponents.push_back(group.trajectories[o].id);
  }
  std::vector<double> scores(wins.begin(), wins.end());
  RankingResult r = arena.finish(order, std::move(scores), tie);
  r.standings = std::move(standings);
  return r;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline RankingResult rank(Topology topology, const TrajectoryGroup& group, const Judge& judge,
                          const RankOptions& options = {}) {
  switch (topology) {
    case Topology::round_robin: return round_robin(group, judge, options);
    case Topology::anchor: return anchor_rank(group, judge, options);
    case Topology::seeded_single_elim: return seeded_single_elim(group, judge, options);
    case Topology::double_elim: return double_elim(group, judge, options.seed, options);
    case Topology::swiss: return swiss(group, judge, options.swiss_rounds, options.seed, options);
  }
  throw ContractError("unknown topology");
}

}  // namespace arena_rank
