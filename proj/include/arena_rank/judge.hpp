#pragma once

// Pairwise/pointwise judge abstraction and the bidirectional protocol.
//
// A Judge answers one *directional* question: given a query, a rubric and two
// trajectories in presentation order, how good is each? evaluate_pair asks it
// twice with the order swapped and sums the answers, which cancels any
// additive preference for the first-presented slot.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arena_rank/core.hpp"
#include "arena_rank/match.hpp"
#include "arena_rank/random.hpp"

namespace arena_rank {

enum class Direction { forward, reverse };

inline const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "reverse"; }

// Failure of a judge backend for one match; carries enough to locate it.
struct JudgeError : Error {
  JudgeError(const std::string& what, std::string match_key, Direction direction)
      : Error(what), match_key(std::move(match_key)), direction(direction) {}
  std::string match_key;
  Direction direction;
};

struct TransportError : JudgeError {
  using JudgeError::JudgeError;
};

struct ReplayMissError : JudgeError {
  using JudgeError::JudgeError;
};

struct DirectionalCall {
  std::string_view query;
  const Trajectory& first;
  const Trajectory& second;
  const Rubric& rubric;
  std::string_view match_key;
  Direction direction;
};

class Judge {
 public:
  virtual ~Judge() = default;

  virtual DirectionalScores compare(const DirectionalCall& call) const = 0;

  virtual double pointwise(std::string_view /*query*/, const Trajectory& /*t*/,
                           const Rubric& /*rubric*/, std::string_view /*call_key*/) const {
    throw ConfigError("judge '" + kind() + "' does not support pointwise scoring");
  }

  virtual std::string kind() const = 0;
  virtual std::uint64_t seed() const { return 0; }
  virtual bool deterministic() const { return true; }
};

// ---------------------------------------------------------------------------
// Simulated judges
// ---------------------------------------------------------------------------

struct NoiseModel {
  double gaussian_sigma = 0.0;
  double position_bias = 0.0;
  std::optional<double> quantization;
  double score_scale = 1.0;

  void validate() const {
    if (!(gaussian_sigma >= 0.0)) throw ConfigError("noise.gaussian_sigma must be >= 0");
    if (quantization && !(*quantization > 0.0)) throw ConfigError("noise.quantization must be > 0");
    if (!(score_scale > 0.0)) throw ConfigError("noise.score_scale must be > 0");
  }

  double quantize(double x) const {
    if (!quantization) return x;
    return std::round(x / *quantization) * *quantization;
  }

  bool noiseless() const { return gaussian_sigma == 0.0 && position_bias == 0.0 && !quantization; }

  bool operator==(const NoiseModel&) const = default;
};

/// Scores trajectories from their latent utility plus keyed noise:
///   raw = score_scale * utility + [position_bias if first] + N(0, sigma)
/// then optional quantization. Noise depends only on (seed, match_key,
/// presented order, slot), so the result is independent of call order.
class SimulatedJudge : public Judge {
 public:
  enum class Mode { pairwise_and_pointwise, pointwise_only };

  SimulatedJudge(NoiseModel noise, std::uint64_t seed, Mode mode = Mode::pairwise_and_pointwise)
      : noise_(noise), seed_(seed), mode_(mode) {
    noise_.validate();
  }

  DirectionalScores compare(const DirectionalCall& call) const override {
    if (mode_ == Mode::pointwise_only) {
      throw ConfigError("pointwise-simulated judge cannot run pairwise comparisons");
    }
    std::string key;
    key.reserve(call.match_key.size() + call.first.id.size() + call.second.id.size() + 2);
    key.append(call.match_key).append("\x1f").append(call.first.id).append("\x1f").append(call.second.id);
    rng::Stream noise(rng::mix(seed_, key));
    const double e1 = noise.normal(0.0, noise_.gaussian_sigma);
    const double e2 = noise.normal(0.0, noise_.gaussian_sigma);
    return {noise_.quantize(noise_.score_scale * utility_of(call.first) + noise_.position_bias + e1),
            noise_.quantize(noise_.score_scale * utility_of(call.second) + e2)};
  }

  double pointwise(std::string_view, const Trajectory& t, const Rubric&,
                   std::string_view call_key) const override {
    rng::Stream noise(rng::mix(seed_, std::string("pointwise\x1f").append(call_key)));
    return noise_.quantize(noise_.score_scale * utility_of(t) + noise.normal(0.0, noise_.gaussian_sigma));
  }

  std::string kind() const override {
    return mode_ == Mode::pointwise_only ? "pointwise-simulated" : "simulated";
  }
  std::uint64_t seed() const override { return seed_; }
  const NoiseModel& noise() const { return noise_; }

 private:
  static double utility_of(const Trajectory& t) {
    if (!t.latent_utility) {
      throw ConfigError("simulated judge needs latent_utility on trajectory '" + t.id + "'");
    }
    return *t.latent_utility;
  }

  NoiseModel noise_;
  std::uint64_t seed_;
  Mode mode_;
};

// ---------------------------------------------------------------------------
// Replay judge
// ---------------------------------------------------------------------------

/// Answers directional calls from a recorded match log. A lookup is keyed by
/// (match_key, presented first id); anything not in the log is a replay miss.
class ReplayJudge : public Judge {
 public:
  explicit ReplayJudge(const std::vector<MatchRecord>& log, std::uint64_t seed = 0) : seed_(seed) {
    for (const auto& m : log) {
      entries_[{m.match_key, m.participant_a}] = {m.participant_b, m.scores.forward};
      entries_[{m.match_key, m.participant_b}] = {m.participant_a, m.scores.reverse};
    }
  }

  DirectionalScores compare(const DirectionalCall& call) const override {
    auto it = entries_.find({std::string(call.match_key), call.first.id});
    if (it == entries_.end() || it->second.first != call.second.id) {
      throw ReplayMissError("replay log has no " + std::string(to_string(call.direction)) +
                                " entry for match '" + std::string(call.match_key) + "' (" +
                                call.first.id + " vs " + call.second.id + ")",
                            std::string(call.match_key), call.direction);
    }
    return it->second.second;
  }

  std::string kind() const override { return "replay"; }
  std::uint64_t seed() const override { return seed_; }
  std::size_t size() const { return entries_.size() / 2; }

 private:
  std::map<std::pair<std::string, std::string>, std::pair<std::string, DirectionalScores>> entries_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Protocol
// ---------------------------------------------------------------------------

/// Bidirectional evaluation: a-first, then b-first, summed per trajectory.
inline ScorePair evaluate_pair(std::string_view query, const Trajectory& a, const Trajectory& b,
                               const Rubric& rubric, const Judge& judge, std::string_view match_key) {
  if (a.id == b.id) {
    throw ContractError("evaluate_pair needs two distinct trajectories, got '" + a.id + "' twice");
  }
  const DirectionalScores fwd = judge.compare({query, a, b, rubric, match_key, Direction::forward});
  const DirectionalScores rev = judge.compare({query, b, a, rubric, match_key, Direction::reverse});
  return ScorePair::combine(fwd, rev);
}

inline double pointwise_score(std::string_view query, const Trajectory& t, const Rubric& rubric,
                              const Judge& judge, std::string_view call_key) {
  return judge.pointwise(query, t, rubric, call_key);
}

}  // namespace arena_rank
