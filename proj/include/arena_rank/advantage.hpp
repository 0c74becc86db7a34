#pragma once

// Rank -> reward -> standardized advantage, the pointwise group-normalized
// baseline, and the clipped KL-regularized surrogate objective.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "arena_rank/core.hpp"
#include "arena_rank/tournaments.hpp"

namespace arena_rank {

inline constexpr double kDefaultAdvantageEpsilon = 1e-6;
inline constexpr double kDefaultClipEpsilon = 0.2;

struct AdvantageVector {
  std::vector<double> rewards;
  std::vector<double> advantages;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double epsilon = kDefaultAdvantageEpsilon;
};

struct LossInputs {
  std::vector<double> ratios;
  std::vector<double> advantages;
  std::vector<double> kl_estimates;
  double clip_epsilon = kDefaultClipEpsilon;
  double beta = 0.0;
};

namespace stats {

// Exact for constant inputs, so their deviations are exactly zero.
inline double mean(std::span<const double> xs) {
  if (!xs.empty() && std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) return xs.front();
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Population standard deviation.
inline double pstdev(std::span<const double> xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

}  // namespace stats

/// r_i = 1 - rank_i / (n - 1).
inline std::vector<double> quantile_rewards(std::span<const int> ranks, std::size_t n) {
  if (n < 2) throw ContractError("quantile_rewards: n must be >= 2");
  if (ranks.size() != n) throw ContractError("quantile_rewards: expected " + std::to_string(n) + " ranks");
  std::vector<bool> seen(n, false);
  for (int r : ranks) {
    if (r < 0 || static_cast<std::size_t>(r) >= n || seen[static_cast<std::size_t>(r)]) {
      throw ContractError("quantile_rewards: ranks are not a permutation of 0..n-1");
    }
    seen[static_cast<std::size_t>(r)] = true;
  }
  std::vector<double> rewards;
  rewards.reserve(n);
  for (int r : ranks) rewards.push_back(1.0 - static_cast<double>(r) / static_cast<double>(n - 1));
  return rewards;
}

/// A_i = (r_i - mean) / (pstdev + epsilon).
inline AdvantageVector standardize(std::span<const double> rewards, double epsilon = kDefaultAdvantageEpsilon) {
  if (rewards.size() < 2) throw ContractError("standardize: need at least 2 rewards");
  if (!(epsilon > 0.0)) throw ContractError("standardize: epsilon must be > 0");
  AdvantageVector out;
  out.rewards.assign(rewards.begin(), rewards.end());
  out.mean_reward = stats::mean(rewards);
  out.std_reward = stats::pstdev(rewards);
  out.epsilon = epsilon;
  out.advantages.reserve(rewards.size());
  for (double r : rewards) out.advantages.push_back((r - out.mean_reward) / (out.std_reward + epsilon));
  return out;
}

inline AdvantageVector ranks_to_advantages(const RankingResult& result,
                                           double epsilon = kDefaultAdvantageEpsilon) {
  const auto rewards = quantile_rewards(result.ranks, result.size());
  return standardize(rewards, epsilon);
}

/// (R_i - mean) / pstdev, all zeros when the group has no spread.
inline std::vector<double> grpo_pointwise_advantages(std::span<const double> scores) {
  if (scores.size() < 2) throw ContractError("grpo_pointwise_advantages: need at least 2 scores");
  const double m = stats::mean(scores);
  const double sd = stats::pstdev(scores);
  std::vector<double> out(scores.size(), 0.0);
  if (sd == 0.0) return out;
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - m) / sd;
  return out;
}

/// Per-trajectory term: min(rho*A, clip(rho, 1-eps, 1+eps)*A).
inline double clipped_term(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

/// Mean over the group of clipped_term - beta * kl.
inline double arena_loss(const LossInputs& in) {
  const std::size_t n = in.ratios.size();
  if (n == 0) throw ContractError("arena_loss: empty inputs");
  if (in.advantages.size() != n || in.kl_estimates.size() != n) {
    throw ContractError("arena_loss: ratios, advantages and kl_estimates must share one length");
  }
  if (!(in.clip_epsilon > 0.0)) throw ContractError("arena_loss: clip_epsilon must be > 0");
  if (!(in.beta >= 0.0)) throw ContractError("arena_loss: beta must be >= 0");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in.ratios[i] > 0.0)) throw ContractError("arena_loss: ratios must be > 0");
    if (!(in.kl_estimates[i] >= 0.0)) throw ContractError("arena_loss: kl estimates must be >= 0");
    total += clipped_term(in.ratios[i], in.advantages[i], in.clip_epsilon) - in.beta * in.kl_estimates[i];
  }
  return total / static_cast<double>(n);
}

}  // namespace arena_rank
