#pragma once

// Simulation laboratory: synthetic groups with known latent quality, the
// pointwise signal-to-noise estimator, ranking-fidelity metrics, and the two
// Monte Carlo experiments (topology fidelity vs budget, discriminative
// collapse of pointwise normalization).
//
// Every trial derives its randomness from (master seed, trial index), and
// aggregation runs in trial order, so reports do not depend on the number of
// worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "arena_rank/advantage.hpp"
#include "arena_rank/core.hpp"
#include "arena_rank/judge.hpp"
#include "arena_rank/random.hpp"
#include "arena_rank/tournaments.hpp"

namespace arena_rank::lab {

enum class AnchorPolicy { mean_utility, sampled };

inline const char* to_string(AnchorPolicy p) { return p == AnchorPolicy::mean_utility ? "mean-utility" : "sampled"; }

struct GroupSpec {
  std::size_t n = 8;
  double utility_mean = 0.5;
  double utility_spread = 0.1;
  AnchorPolicy anchor_policy = AnchorPolicy::mean_utility;
  std::uint64_t seed = 0;
};

/// Latent utilities ~ Normal(mean, spread) clipped to [0,1]. The anchor sits
/// at index 0; under mean-utility it gets exactly utility_mean.
inline TrajectoryGroup generate_group(const GroupSpec& spec) {
  if (spec.n < 2) throw ContractError("generate_group: n must be >= 2");
  if (!(spec.utility_spread >= 0.0)) throw ContractError("generate_group: utility_spread must be >= 0");
  TrajectoryGroup g;
  g.group_id = "sim-" + std::to_string(spec.seed);
  g.query = "synthetic query";
  g.rubric = {"synthetic rubric", "synthetic"};
  g.anchor_index = 0;
  rng::Stream draw(rng::mix(spec.seed, "generate-group"));
  for (std::size_t i = 0; i < spec.n; ++i) {
    double u = draw.normal(spec.utility_mean, spec.utility_spread);
    if (i == 0 && spec.anchor_policy == AnchorPolicy::mean_utility) u = spec.utility_mean;
    Trajectory t;
    t.id = "t" + std::to_string(i);
    t.query = g.query;
    t.steps = {{"synthetic reasoning step", std::nullopt, std::nullopt}};
    t.answer = "synthetic answer " + std::to_string(i);
    t.latent_utility = std::clamp(u, 0.0, 1.0);
    g.trajectories.push_back(std::move(t));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Tau-a between two orderings of the same id set.
inline double kendall_tau(std::span<const std::string> a, std::span<const std::string> b) {
  const std::size_t n = a.size();
  if (n < 2 || b.size() != n) throw ContractError("kendall_tau: need two orderings of equal length >= 2");
  std::map<std::string_view, std::size_t> pos_b;
  for (std::size_t i = 0; i < n; ++i) pos_b.emplace(b[i], i);
  if (pos_b.size() != n) throw ContractError("kendall_tau: duplicate ids");
  std::vector<std::size_t> mapped;
  mapped.reserve(n);
  for (const auto& id : a) {
    auto it = pos_b.find(id);
    if (it == pos_b.end()) throw ContractError("kendall_tau: id sets differ ('" + id + "')");
    mapped.push_back(it->second);
  }
  long long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      (mapped[i] < mapped[j] ? concordant : discordant) += 1;
    }
  }
  return static_cast<double>(concordant - discordant) / static_cast<double>(n * (n - 1) / 2);
}

/// Pearson correlation; 0 when either side has no variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractError("pearson: need equal lengths >= 2");
  const double mx = stats::mean(x), my = stats::mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline std::vector<double> latent_utilities(const TrajectoryGroup& g) {
  std::vector<double> u;
  for (const auto& t : g.trajectories) {
    if (!t.latent_utility) throw ConfigError("trajectory '" + t.id + "' has no latent utility");
    u.push_back(*t.latent_utility);
  }
  return u;
}

/// Ids ordered by descending latent utility, group index breaking ties.
inline std::vector<std::string> latent_order(const TrajectoryGroup& g) {
  const auto u = latent_utilities(g);
  std::vector<std::size_t> idx(u.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return u[x] > u[y]; });
  std::vector<std::string> ids;
  for (std::size_t i : idx) ids.push_back(g.trajectories[i].id);
  return ids;
}

// ---------------------------------------------------------------------------
// Signal-to-noise
// ---------------------------------------------------------------------------

inline constexpr double kSnrGuard = 1e-12;
inline constexpr std::size_t kDefaultRepetitions = 16;

struct SnrReport {
  double sigma_group = 0.0;
  double sigma_noise = 0.0;
  double snr = 0.0;
  std::size_t repetitions = 0;
};

/// Scores every trajectory `repetitions` times. sigma_noise is the mean
/// across-repetition (sample) std; sigma_group the population std of the
/// per-trajectory mean scores.
inline SnrReport estimate_snr(const TrajectoryGroup& group, const Judge& judge, std::size_t repetitions) {
  if (repetitions < 2) throw PreconditionError("estimate_snr", "repetitions must be >= 2");
  std::vector<double> means;
  double noise_sum = 0.0;
  std::vector<double> draws(repetitions);
  for (const auto& t : group.trajectories) {
    for (std::size_t r = 0; r < repetitions; ++r) {
      const std::string key = group.group_id + "/pointwise/" + t.id + "/" + std::to_string(r);
      draws[r] = pointwise_score(group.query, t, group.rubric, judge, key);
    }
    const double m = stats::mean(draws);
    double ss = 0.0;
    for (double d : draws) ss += (d - m) * (d - m);
    noise_sum += std::sqrt(ss / static_cast<double>(repetitions - 1));
    means.push_back(m);
  }
  SnrReport rep;
  rep.repetitions = repetitions;
  rep.sigma_noise = noise_sum / static_cast<double>(group.size());
  rep.sigma_group = stats::pstdev(means);
  rep.snr = rep.sigma_group / std::max(rep.sigma_noise, kSnrGuard);
  return rep;
}

// ---------------------------------------------------------------------------
// Trial driver
// ---------------------------------------------------------------------------

namespace detail {

inline std::size_t resolve_workers(std::size_t requested, std::size_t trials) {
  std::size_t w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(w, trials));
}

// Runs fn(trial) for every trial and returns results indexed by trial.
template <typename Fn>
auto run_trials(std::size_t trials, std::size_t workers, Fn fn) {
  using Result = decltype(fn(std::size_t{0}));
  std::vector<Result> results(trials);
  std::vector<std::exception_ptr> errors(trials);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < resolve_workers(workers, trials); ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < trials; t = next++) {
          try {
            results[t] = fn(t);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) { return rng::mix(master, trial); }

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd summarize(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  return {stats::mean(xs), stats::pstdev(xs)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fidelity experiment
// ---------------------------------------------------------------------------

struct TopologyFidelity {
  Topology topology = Topology::round_robin;
  double tau_truth_mean = 0.0;
  double tau_truth_std = 0.0;
  double tau_round_robin_mean = 0.0;
  double tau_round_robin_std = 0.0;
  double top1_accuracy = 0.0;
  double mean_comparisons = 0.0;
};

struct FidelityReport {
  GroupSpec spec;
  NoiseModel noise;
  std::size_t trials = 0;
  std::vector<TopologyFidelity> rows;

  const TopologyFidelity& row(Topology t) const {
    for (const auto& r : rows) {
      if (r.topology == t) return r;
    }
    throw ContractError(std::string("no fidelity row for ") + to_string(t));
  }
};

inline FidelityReport run_fidelity_experiment(const GroupSpec& spec, const NoiseModel& noise, std::size_t trials,
                                              const std::vector<Topology>& topologies, std::size_t workers = 0) {
  if (trials < 1) throw ContractError("run_fidelity_experiment: trials must be >= 1");
  noise.validate();

  struct TrialMetrics {
    std::vector<double> tau_truth, tau_rr, top1, comparisons;
  };

  auto per_trial = [&](std::size_t trial) {
    const std::uint64_t ts = detail::trial_seed(spec.seed, trial);
    GroupSpec gs = spec;
    gs.seed = rng::mix(ts, "group");
    const TrajectoryGroup group = generate_group(gs);
    const SimulatedJudge judge(noise, rng::mix(ts, "judge"));
    RankOptions opts;
    opts.seed = rng::mix(ts, "topology");

    const auto truth = latent_order(group);
    const auto utilities = latent_utilities(group);
    const double best = *std::max_element(utilities.begin(), utilities.end());
    const auto rr_order = round_robin(group, judge, opts).order();

    TrialMetrics m;
    for (Topology t : topologies) {
      const RankingResult r = rank(t, group, judge, opts);
      const auto order = r.order();
      m.tau_truth.push_back(kendall_tau(order, truth));
      m.tau_rr.push_back(kendall_tau(order, rr_order));
      const auto winner = std::find(r.ranks.begin(), r.ranks.end(), 0) - r.ranks.begin();
      m.top1.push_back(utilities[static_cast<std::size_t>(winner)] == best ? 1.0 : 0.0);
      m.comparisons.push_back(static_cast<double>(r.comparison_count));
    }
    return m;
  };

  const auto results = detail::run_trials(trials, workers, per_trial);

  FidelityReport report{spec, noise, trials, {}};
  for (std::size_t k = 0; k < topologies.size(); ++k) {
    std::vector<double> tau_truth, tau_rr, top1, comps;
    for (const auto& m : results) {
      tau_truth.push_back(m.tau_truth[k]);
      tau_rr.push_back(m.tau_rr[k]);
      top1.push_back(m.top1[k]);
      comps.push_back(m.comparisons[k]);
    }
    const auto tt = detail::summarize(tau_truth);
    const auto tr = detail::summarize(tau_rr);
    report.rows.push_back({topologies[k], tt.mean, tt.std, tr.mean, tr.std, stats::mean(top1), stats::mean(comps)});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Collapse experiment
// ---------------------------------------------------------------------------

struct CollapseConfig {
  std::vector<double> spreads{0.2, 0.1, 0.05, 0.02};
  NoiseModel noise{0.05, 0.0, std::nullopt, 1.0};
  std::size_t trials = 2000;
  std::size_t n = 8;
  double utility_mean = 0.5;
  std::size_t repetitions = kDefaultRepetitions;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

struct CollapseRow {
  double spread = 0.0;
  double snr = 0.0;
  double pointwise_corr = 0.0;
  double arena_corr = 0.0;
};

struct CollapseReport {
  CollapseConfig config;
  std::vector<CollapseRow> rows;
};

/// Per spread level: mean pointwise SNR, and mean per-trial Pearson
/// correlation of (a) single-round pointwise group-normalized advantages and
/// (b) seeded single-elimination rank advantages against the standardized
/// latent utilities.
inline CollapseReport run_collapse_experiment(const CollapseConfig& cfg) {
  if (cfg.trials < 1) throw ContractError("run_collapse_experiment: trials must be >= 1");
  cfg.noise.validate();

  CollapseReport report{cfg, {}};
  for (std::size_t level = 0; level < cfg.spreads.size(); ++level) {
    const double spread = cfg.spreads[level];
    const std::uint64_t level_seed = rng::mix(cfg.seed, level);

    struct TrialOut {
      double snr = 0.0, pointwise = 0.0, arena = 0.0;
    };
    auto per_trial = [&](std::size_t trial) {
      const std::uint64_t ts = detail::trial_seed(level_seed, trial);
      GroupSpec gs{cfg.n, cfg.utility_mean, spread, AnchorPolicy::mean_utility, rng::mix(ts, "group")};
      const TrajectoryGroup group = generate_group(gs);
      const SimulatedJudge judge(cfg.noise, rng::mix(ts, "judge"));

      const auto truth = standardize(latent_utilities(group)).advantages;

      std::vector<double> single_round;
      for (const auto& t : group.trajectories) {
        single_round.push_back(pointwise_score(group.query, t, group.rubric, judge, group.group_id + "/single/" + t.id));
      }
      const auto pointwise_adv = grpo_pointwise_advantages(single_round);
      const auto arena_adv = ranks_to_advantages(seeded_single_elim(group, judge)).advantages;

      TrialOut out;
      out.snr = estimate_snr(group, judge, cfg.repetitions).snr;
      out.pointwise = pearson(pointwise_adv, truth);
      out.arena = pearson(arena_adv, truth);
      return out;
    };

    const auto results = detail::run_trials(cfg.trials, cfg.workers, per_trial);
    CollapseRow row{spread, 0.0, 0.0, 0.0};
    for (const auto& r : results) {
      row.snr += r.snr;
      row.pointwise_corr += r.pointwise;
      row.arena_corr += r.arena;
    }
    const double t = static_cast<double>(results.size());
    row.snr /= t;
    row.pointwise_corr /= t;
    row.arena_corr /= t;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace arena_rank::lab
