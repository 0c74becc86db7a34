#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "arena_rank/lab.hpp"
#include "support.hpp"

namespace arena_rank {
namespace {

using namespace lab;

TEST(GenerateGroup, ZeroSpreadPutsEveryoneAtTheMean) {
  const auto g = generate_group({8, 0.6, 0.0, AnchorPolicy::sampled, 3});
  for (const auto& t : g.trajectories) EXPECT_EQ(*t.latent_utility, 0.6);
  EXPECT_EQ(g.anchor_index, std::optional<std::size_t>(0));
  EXPECT_TRUE(validate_group(g).empty());
}

TEST(GenerateGroup, DeterministicInSeed) {
  const GroupSpec spec{16, 0.5, 0.1, AnchorPolicy::mean_utility, 99};
  EXPECT_EQ(generate_group(spec), generate_group(spec));
  auto other = spec;
  other.seed = 100;
  EXPECT_NE(generate_group(spec), generate_group(other));
}

TEST(GenerateGroup, SpreadIsTheUtilityStd) {
  const auto g = generate_group({10000, 0.5, 0.1, AnchorPolicy::sampled, 5});
  const auto u = latent_utilities(g);
  EXPECT_NEAR(stats::pstdev(u), 0.1, 0.015);
  EXPECT_NEAR(stats::mean(u), 0.5, 0.01);
}

TEST(GenerateGroup, MeanUtilityAnchor) {
  const auto g = generate_group({8, 0.45, 0.2, AnchorPolicy::mean_utility, 1});
  EXPECT_EQ(*g.trajectories[0].latent_utility, 0.45);
}

TEST(KendallTau, Examples) {
  const std::vector<std::string> a{"w", "x", "y", "z"};
  const std::vector<std::string> rev{"z", "y", "x", "w"};
  const std::vector<std::string> swap{"w", "y", "x", "z"};
  EXPECT_DOUBLE_EQ(kendall_tau(a, a), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(a, rev), -1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(a, swap), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(kendall_tau(swap, a), 2.0 / 3.0);
  EXPECT_THROW(kendall_tau(a, std::vector<std::string>{"w", "x", "y", "q"}), ContractError);
}

TEST(KendallTau, SymmetricAgainstBruteForce) {
  rng::Stream s(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + s.below(10);
    std::vector<std::string> a;
    for (std::size_t i = 0; i < n; ++i) a.push_back("id" + std::to_string(i));
    auto b = a;
    s.shuffle(a);
    s.shuffle(b);
    int conc = 0, disc = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto bi = std::find(b.begin(), b.end(), a[i]) - b.begin();
        const auto bj = std::find(b.begin(), b.end(), a[j]) - b.begin();
        (bi < bj ? conc : disc)++;
      }
    const double oracle = static_cast<double>(conc - disc) / static_cast<double>(n * (n - 1) / 2);
    EXPECT_NEAR(kendall_tau(a, b), oracle, 1e-12);
    EXPECT_EQ(kendall_tau(a, b), kendall_tau(b, a));
    EXPECT_EQ(kendall_tau(b, b), 1.0);
  }
}

TEST(Pearson, ZeroVarianceSideIsZero) {
  EXPECT_EQ(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_NEAR(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}), 1.0, 1e-12);
  EXPECT_NEAR(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0, 1e-12);
}

TEST(EstimateSnr, NoiselessJudge) {
  const auto g = generate_group({8, 0.5, 0.1, AnchorPolicy::sampled, 2});
  const auto rep = estimate_snr(g, testing::noiseless_judge(), 16);
  EXPECT_EQ(rep.sigma_noise, 0.0);
  EXPECT_NEAR(rep.sigma_group, stats::pstdev(latent_utilities(g)), 1e-12);
  EXPECT_GT(rep.snr, 1e6);
}

TEST(EstimateSnr, IdenticalLatentsDriveSnrTowardZero) {
  const auto g = generate_group({16, 0.5, 0.0, AnchorPolicy::sampled, 2});
  const SimulatedJudge judge(NoiseModel{0.05, 0.0, std::nullopt, 1.0}, 7);
  const auto few = estimate_snr(g, judge, 4);
  const auto many = estimate_snr(g, judge, 400);
  EXPECT_LT(many.snr, few.snr);
  EXPECT_LT(many.snr, 0.1);
}

TEST(EstimateSnr, ComparableRegime) {
  const auto g = generate_group({200, 0.5, 0.05, AnchorPolicy::sampled, 11});
  const SimulatedJudge judge(NoiseModel{0.05, 0.0, std::nullopt, 1.0}, 12);
  const auto rep = estimate_snr(g, judge, 100);
  EXPECT_NEAR(rep.sigma_noise, 0.05, 0.05 * 0.2);
  EXPECT_GE(rep.snr, 0.7);
  EXPECT_LE(rep.snr, 1.4);
}

TEST(EstimateSnr, InvariantUnderReordering) {
  auto g = generate_group({12, 0.5, 0.08, AnchorPolicy::sampled, 3});
  const SimulatedJudge judge(NoiseModel{0.05, 0.0, std::nullopt, 1.0}, 4);
  const auto before = estimate_snr(g, judge, 8);
  std::reverse(g.trajectories.begin(), g.trajectories.end());
  g.anchor_index = g.size() - 1;
  const auto after = estimate_snr(g, judge, 8);
  EXPECT_NEAR(before.snr, after.snr, 1e-12);
  EXPECT_NEAR(before.sigma_noise, after.sigma_noise, 1e-12);
  EXPECT_NEAR(before.sigma_group, after.sigma_group, 1e-12);
}

TEST(Fidelity, NoiselessIsPerfect) {
  const GroupSpec spec{8, 0.5, 0.1, AnchorPolicy::mean_utility, 21};
  const std::vector<Topology> all(std::begin(kAllTopologies), std::end(kAllTopologies));
  const auto rep = run_fidelity_experiment(spec, NoiseModel{}, 50, all, 2);
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.top1_accuracy, 1.0) << to_string(row.topology);
    EXPECT_EQ(row.mean_comparisons, static_cast<double>(comparison_budget(row.topology, 8)));
  }
  EXPECT_EQ(rep.row(Topology::round_robin).tau_truth_mean, 1.0);
  EXPECT_EQ(rep.row(Topology::seeded_single_elim).tau_truth_mean, 1.0);
}

TEST(Fidelity, RoundRobinAgreesWithItselfAndWorkersDoNotMatter) {
  const GroupSpec spec{8, 0.5, 0.05, AnchorPolicy::mean_utility, 22};
  const NoiseModel noise{0.05, 0.02, std::nullopt, 1.0};
  const std::vector<Topology> all(std::begin(kAllTopologies), std::end(kAllTopologies));
  const auto a = run_fidelity_experiment(spec, noise, 64, all, 1);
  const auto b = run_fidelity_experiment(spec, noise, 64, all, 5);
  EXPECT_EQ(a.row(Topology::round_robin).tau_round_robin_mean, 1.0);
  EXPECT_EQ(a.row(Topology::round_robin).tau_round_robin_std, 0.0);
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].tau_truth_mean, b.rows[k].tau_truth_mean);
    EXPECT_EQ(a.rows[k].tau_truth_std, b.rows[k].tau_truth_std);
    EXPECT_EQ(a.rows[k].top1_accuracy, b.rows[k].top1_accuracy);
  }
}

TEST(Fidelity, TauDegradesAsNoiseGrows) {
  const GroupSpec spec{8, 0.5, 0.1, AnchorPolicy::mean_utility, 23};
  const std::vector<Topology> all(std::begin(kAllTopologies), std::end(kAllTopologies));
  std::vector<FidelityReport> levels;
  for (double sigma : {0.0, 0.05, 0.15}) {
    levels.push_back(run_fidelity_experiment(spec, NoiseModel{sigma, 0.0, std::nullopt, 1.0}, 1000, all));
  }
  for (Topology t : all) {
    for (std::size_t k = 1; k < levels.size(); ++k) {
      EXPECT_GE(levels[k - 1].row(t).tau_truth_mean - levels[k].row(t).tau_truth_mean, 0.02) << to_string(t);
    }
  }
}

TEST(Collapse, NoiselessJudge) {
  CollapseConfig cfg;
  cfg.noise = NoiseModel{};
  cfg.trials = 100;
  cfg.spreads = {0.2, 0.05};
  cfg.seed = 8;
  const auto rep = run_collapse_experiment(cfg);

  for (std::size_t level = 0; level < cfg.spreads.size(); ++level) {
    // Ceiling oracle: rank advantages of the exact latent order against the
    // standardized latents, over the same generated groups.
    double ceiling = 0.0;
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      const auto ts = lab::detail::trial_seed(rng::mix(cfg.seed, level), trial);
      const auto g = generate_group(GroupSpec{cfg.n, cfg.utility_mean, cfg.spreads[level],
                                               AnchorPolicy::mean_utility, rng::mix(ts, "group")});
      const auto u = latent_utilities(g);
      std::vector<int> ranks(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) {
        int better = 0;
        for (std::size_t j = 0; j < u.size(); ++j) better += (u[j] > u[i] || (u[j] == u[i] && j < i)) ? 1 : 0;
        ranks[i] = better;
      }
      ceiling += pearson(standardize(quantile_rewards(ranks, u.size())).advantages, standardize(u).advantages);
    }
    ceiling /= static_cast<double>(cfg.trials);
    EXPECT_NEAR(rep.rows[level].pointwise_corr, 1.0, 1e-9);
    EXPECT_NEAR(rep.rows[level].arena_corr, ceiling, 1e-12);
    EXPECT_GT(rep.rows[level].snr, 1e6);
  }
}

TEST(Collapse, PointwiseCorrelationFallsWithSpread) {
  CollapseConfig cfg;
  cfg.trials = 400;
  cfg.spreads = {0.2, 0.05, 0.0};
  cfg.seed = 9;
  const auto rep = run_collapse_experiment(cfg);
  EXPECT_GT(rep.rows[0].pointwise_corr, rep.rows[1].pointwise_corr);
  EXPECT_GT(rep.rows[0].snr, rep.rows[1].snr);
  EXPECT_NEAR(rep.rows[2].pointwise_corr, 0.0, 0.05);
}

TEST(Collapse, ReproducibleAcrossWorkers) {
  CollapseConfig cfg;
  cfg.trials = 50;
  cfg.seed = 10;
  cfg.workers = 1;
  const auto a = run_collapse_experiment(cfg);
  cfg.workers = 6;
  const auto b = run_collapse_experiment(cfg);
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].snr, b.rows[k].snr);
    EXPECT_EQ(a.rows[k].pointwise_corr, b.rows[k].pointwise_corr);
    EXPECT_EQ(a.rows[k].arena_corr, b.rows[k].arena_corr);
  }
}

}  // namespace
}  // namespace arena_rank
