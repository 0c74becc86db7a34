#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr interleaved
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ARENA_RANK_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("arena_rank_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p;
  }

  const fs::path configs_{ARENA_RANK_CONFIGS};
  fs::path dir_;
};

TEST_F(Cli, RoundRobinOnEightWritesTwentyEightMatches) {
  const auto out = dir_ / "out.json";
  const auto log = dir_ / "log.jsonl";
  const auto r = run("rank --topology round-robin --in " + (configs_ / "sample_group.jsonl").string() +
                     " --seed 7 --noise-sigma 0.05 --out " + out.string() + " --match-log " + log.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(slurp(out));
  EXPECT_EQ(j.at("comparison_count"), 28);
  EXPECT_EQ(j.at("match_log").size(), 28u);
  EXPECT_EQ(j.at("ids").size(), 8u);
  std::ifstream in(log);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 28);
}

TEST_F(Cli, BudgetOnly) {
  const auto r = run("rank --budget-only --topology swiss -n 8");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "12\n");
  EXPECT_EQ(run("rank --budget-only --topology double-elim -n 6").code, 3);
}

TEST_F(Cli, MalformedLineExitsWithLineNumber) {
  const auto in = write("bad.jsonl", "{\"id\":\"a\",\"query\":\"q\",\"answer\":\"x\"}\n{\"id\":\"b\",\n");
  const auto r = run("rank --topology round-robin --in " + in.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("line 2"), std::string::npos) << r.out;
}

TEST_F(Cli, PreconditionFailureExitsThree) {
  const auto in = write("no_anchor.jsonl",
                        "{\"id\":\"a\",\"query\":\"q\",\"answer\":\"x\"}\n{\"id\":\"b\",\"query\":\"q\",\"answer\":\"y\"}\n");
  const auto r = run("rank --topology anchor --in " + in.string());
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(r.out.find("anchor"), std::string::npos);
}

TEST_F(Cli, ReplayReproducesRecordedRun) {
  const auto group = (configs_ / "sample_group.jsonl").string();
  const auto first = dir_ / "first.json", second = dir_ / "second.json", log = dir_ / "log.jsonl";
  ASSERT_EQ(run("rank --topology swiss --in " + group + " --seed 3 --noise-sigma 0.1 --out " + first.string() +
                " --match-log " + log.string())
                .code,
            0);
  ASSERT_EQ(run("rank --topology swiss --in " + group + " --seed 3 --judge replay --replay-log " + log.string() +
                " --out " + second.string())
                .code,
            0);
  auto a = json::parse(slurp(first)), b = json::parse(slurp(second));
  for (auto* j : {&a, &b}) {
    for (auto* log_field : {&(*j)["match_log"], &(*j)["result"]["matches"]}) {
      for (auto& m : *log_field) {
        m.erase("judge");
        m.erase("judge_seed");
      }
    }
  }
  EXPECT_EQ(a, b);
}

TEST_F(Cli, NoiselessFidelityExperiment) {
  const auto cfg = write("fidelity.json", R"({
    "experiment": {"kind": "fidelity", "n": 8, "utility_spread": 0.1, "trials": 10, "seed": 5}
  })");
  const auto r = run("experiment --config " + cfg.string() + " --out-dir " + (dir_ / "res").string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream in(dir_ / "res" / "results.jsonl");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    const json j = json::parse(line);
    ++rows;
    EXPECT_EQ(j.at("top1_accuracy"), 1.0);
    if (j.at("topology") == "round-robin" || j.at("topology") == "seeded-single-elim") {
      EXPECT_EQ(j.at("tau_truth_mean"), 1.0);
    }
  }
  EXPECT_EQ(rows, 5);
  EXPECT_NE(slurp(dir_ / "res" / "summary.txt").find("seeded-single-elim  1.0000"), std::string::npos);
}

TEST_F(Cli, BundledCollapseConfigIsMonotoneAndReproducible) {
  const auto cfg = (configs_ / "collapse.json").string();
  ASSERT_EQ(run("experiment --config " + cfg + " --workers 3 --out-dir " + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(run("experiment --config " + cfg + " --workers 1 --out-dir " + (dir_ / "b").string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "results.jsonl"), slurp(dir_ / "b" / "results.jsonl"));
  EXPECT_EQ(slurp(dir_ / "a" / "summary.txt"), slurp(dir_ / "b" / "summary.txt"));

  std::ifstream in(dir_ / "a" / "results.jsonl");
  std::string line;
  std::vector<json> rows;
  while (std::getline(in, line)) rows.push_back(json::parse(line));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_LT(rows[k].at("utility_spread"), rows[k - 1].at("utility_spread"));
    EXPECT_LT(rows[k].at("snr"), rows[k - 1].at("snr"));
    EXPECT_LT(rows[k].at("pointwise_corr"), rows[k - 1].at("pointwise_corr"));
    EXPECT_LT(rows[k].at("arena_corr"), rows[k - 1].at("arena_corr"));
  }
  for (const auto& row : rows) {
    if (row.at("utility_spread").get<double>() <= 0.05) {
      EXPECT_GE(row.at("arena_corr").get<double>() - row.at("pointwise_corr").get<double>(), 0.1);
    }
  }
}

TEST_F(Cli, UnknownConfigKeysAreListed) {
  const auto cfg = write("bad.json", R"({"experiment": {"kind": "collapse", "trails": 5}, "judge": {"sigma": 1}})");
  const auto r = run("experiment --config " + cfg.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("experiment.trails"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("judge.sigma"), std::string::npos) << r.out;
}

TEST_F(Cli, ConfigFromEnvironment) {
  const auto cfg = write("env.json", R"({"topology": {"name": "anchor", "seed": 4}, "judge": {"noise": {"gaussian_sigma": 0.02}}})");
  const auto out = dir_ / "out.json";
  const auto r = run("rank --topology seeded-single-elim --in " + (configs_ / "sample_group.jsonl").string() + " --out " +
                     out.string());
  ASSERT_EQ(r.code, 0);
  const auto without = json::parse(slurp(out));
  const auto r2 = run("rank --topology seeded-single-elim --in " + (configs_ / "sample_group.jsonl").string() +
                      " --out " + out.string() + " --config " + cfg.string());
  ASSERT_EQ(r2.code, 0);
  const auto with = json::parse(slurp(out));
  EXPECT_EQ(without.at("seeds").at("topology"), 0);
  EXPECT_EQ(with.at("seeds").at("topology"), 4);

  ::setenv("ARENA_RANK_CONFIG", cfg.c_str(), 1);
  const auto r3 = run("rank --topology seeded-single-elim --in " + (configs_ / "sample_group.jsonl").string() +
                      " --out " + out.string());
  ::unsetenv("ARENA_RANK_CONFIG");
  ASSERT_EQ(r3.code, 0);
  EXPECT_EQ(json::parse(slurp(out)).at("seeds").at("topology"), 4);
}

}  // namespace
