#include <gtest/gtest.h>

#include "arena_rank/core.hpp"
#include "support.hpp"

namespace arena_rank {
namespace {

using testing::make_group;

TEST(ValidateGroup, MinimalGroupIsValid) {
  const auto g = make_group({0.2, 0.8});
  EXPECT_TRUE(validate_group(g).empty());
}

TEST(ValidateGroup, DuplicateIds) {
  auto g = make_group({0.2, 0.8, 0.5});
  g.trajectories[2].id = "t0";
  EXPECT_TRUE(report_contains(validate_group(g), "duplicate id"));
}

TEST(ValidateGroup, SingleTrajectoryIsTooSmall) {
  const auto g = make_group({0.5});
  EXPECT_TRUE(report_contains(validate_group(g), "group too small"));
}

TEST(ValidateGroup, ReportsEveryViolation) {
  auto g = make_group({0.2, 0.8, 0.5}, 7);
  g.rubric.text.clear();
  g.trajectories[0].id.clear();
  g.trajectories[1].query = "other";
  g.trajectories[1].latent_utility = 1.5;
  g.trajectories[2].likelihood_ratio = 0.0;
  g.trajectories[2].kl_estimate = -0.1;
  g.trajectories[2].steps = {{"z", std::nullopt, std::string("orphan")}};

  const auto report = validate_group(g);
  for (const char* code : {"empty rubric", "anchor out of range", "empty id", "query mismatch",
                           "latent utility out of range", "nonpositive likelihood ratio", "negative kl estimate",
                           "orphan tool response"}) {
    EXPECT_TRUE(report_contains(report, code)) << code;
  }
}

TEST(ValidateGroup, IdempotentAndNonMutating) {
  auto g = make_group({0.2, 0.8});
  g.trajectories[1].id = "t0";
  const TrajectoryGroup before = g;
  const auto first = validate_group(g);
  const auto second = validate_group(g);
  EXPECT_EQ(first, second);
  EXPECT_EQ(g, before);
}

}  // namespace
}  // namespace arena_rank
