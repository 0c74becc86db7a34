// arena-rank: rank a trajectory group, run lab experiments, or serve rewards.
//
//   arena-rank rank --topology round-robin --in group.jsonl --judge sim --seed 7
//   arena-rank rank --budget-only --topology swiss -n 8
//   arena-rank experiment --config configs/collapse.json --out-dir results/
//   arena-rank serve --config configs/service.json

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "arena_rank/arena_rank.hpp"

namespace fs = std::filesystem;
using namespace arena_rank;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInputError = 2,
  kPrecondition = 3,
  kJudgeFailure = 4,
};

AppConfig load_optional_config(const std::optional<std::string>& flag) {
  if (auto path = resolve_config_path(flag)) return load_config(*path);
  return {};
}

std::string fixed(double x, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << x;
  return os.str();
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

struct RankFlags {
  std::string topology;
  std::optional<std::string> in;
  std::optional<std::string> config;
  std::optional<std::string> judge;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> replay_log;
  std::optional<std::string> endpoint;
  std::optional<double> noise_sigma;
  std::optional<double> position_bias;
  std::optional<double> quantization;
  std::optional<double> score_scale;
  std::optional<double> epsilon;
  std::optional<int> swiss_rounds;
  std::optional<std::size_t> parallelism;
  std::string group_id = "group";
  std::string rubric = "default rubric";
  std::string rubric_id = "default";
  std::optional<std::string> out;
  std::optional<std::string> match_log;
  bool budget_only = false;
  std::size_t n = 0;
};

int run_rank(const RankFlags& f) {
  auto topology = parse_topology(f.topology);
  if (!topology) {
    std::cerr << "error: unknown topology '" << f.topology << "'\n";
    return kInputError;
  }
  if (f.budget_only) {
    if (f.n == 0) {
      std::cerr << "error: --budget-only needs -n\n";
      return kInputError;
    }
    try {
      std::cout << comparison_budget(*topology, f.n) << '\n';
    } catch (const PreconditionError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kPrecondition;
    }
    return kOk;
  }
  if (!f.in) {
    std::cerr << "error: --in is required unless --budget-only is given\n";
    return kInputError;
  }

  AppConfig cfg = load_optional_config(f.config);
  JudgeSpec spec = cfg.judge;
  if (f.judge) {
    auto kind = parse_judge_kind(*f.judge);
    if (!kind) {
      std::cerr << "error: unknown judge '" << *f.judge << "'\n";
      return kInputError;
    }
    spec.kind = *kind;
  }
  if (f.noise_sigma) spec.noise.gaussian_sigma = *f.noise_sigma;
  if (f.position_bias) spec.noise.position_bias = *f.position_bias;
  if (f.quantization) spec.noise.quantization = *f.quantization;
  if (f.score_scale) spec.noise.score_scale = *f.score_scale;
  if (f.replay_log) spec.replay_log = *f.replay_log;
  if (f.endpoint) spec.remote.endpoint = *f.endpoint;

  RankOptions options;
  options.seed = cfg.topology.seed;
  options.swiss_rounds = f.swiss_rounds ? f.swiss_rounds : cfg.topology.swiss_rounds;
  options.parallelism = f.parallelism.value_or(cfg.topology.parallelism);
  if (f.seed) {
    spec.seed = *f.seed;
    options.seed = *f.seed;
  }

  std::ifstream in(*f.in);
  if (!in) {
    std::cerr << "error: cannot open '" << *f.in << "'\n";
    return kInputError;
  }
  TrajectoryGroup group;
  try {
    group = read_group_jsonl(in, f.group_id, {f.rubric, f.rubric_id});
  } catch (const ParseError& e) {
    std::cerr << "error: " << *f.in << ": " << e.what() << '\n';
    return kInputError;
  }

  const auto judge = make_judge(spec);
  RankingResult result;
  try {
    result = rank(*topology, group, *judge, options);
  } catch (const PreconditionError& e) {
    std::cerr << "error: topology " << e.topology << ": " << e.reason << '\n';
    return kPrecondition;
  } catch (const JudgeError& e) {
    std::cerr << "error: judge failed on match '" << e.match_key << "': " << e.what() << '\n';
    return kJudgeFailure;
  }
  const AdvantageVector adv = ranks_to_advantages(result, f.epsilon.value_or(cfg.topology.epsilon));

  std::cout << "topology " << result.topology << ", " << result.size() << " trajectories, "
            << result.comparison_count << " matches\n";
  std::cout << pad("id", 16) << pad("rank", 6) << pad("reward", 10) << "advantage\n";
  for (std::size_t i = 0; i < result.size(); ++i) {
    std::cout << pad(result.ids[i], 16) << pad(std::to_string(result.ranks[i]), 6) << pad(fixed(adv.rewards[i]), 10)
              << fixed(adv.advantages[i]) << '\n';
  }

  if (f.out) {
    std::ofstream out(*f.out);
    json response = make_rank_response(result, adv, spec.seed, true);
    response["result"] = result;
    out << response.dump(2) << '\n';
  }
  if (f.match_log) {
    std::ofstream out(*f.match_log, std::ios::app);
    write_match_log(out, result.matches);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

struct ExperimentFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> workers;
  std::string out_dir = ".";
};

std::string fidelity_summary(const lab::FidelityReport& r) {
  std::ostringstream os;
  os << "fidelity: n=" << r.spec.n << " spread=" << fixed(r.spec.utility_spread, 3)
     << " sigma=" << fixed(r.noise.gaussian_sigma, 3) << " trials=" << r.trials << '\n';
  os << pad("topology", 20) << pad("tau_truth", 10) << pad("(sd)", 9) << pad("tau_rr", 10) << pad("(sd)", 9)
     << pad("top1", 8) << "comparisons\n";
  for (const auto& row : r.rows) {
    os << pad(to_string(row.topology), 20) << pad(fixed(row.tau_truth_mean), 10) << pad(fixed(row.tau_truth_std), 9)
       << pad(fixed(row.tau_round_robin_mean), 10) << pad(fixed(row.tau_round_robin_std), 9)
       << pad(fixed(row.top1_accuracy, 3), 8) << fixed(row.mean_comparisons, 1) << '\n';
  }
  return os.str();
}

std::string collapse_summary(const lab::CollapseReport& r) {
  std::ostringstream os;
  os << "collapse: n=" << r.config.n << " sigma=" << fixed(r.config.noise.gaussian_sigma, 3)
     << " trials=" << r.config.trials << " repetitions=" << r.config.repetitions << '\n';
  os << pad("spread", 10) << pad("snr", 10) << pad("pointwise_corr", 16) << "arena_corr\n";
  for (const auto& row : r.rows) {
    os << pad(fixed(row.spread, 3), 10) << pad(fixed(row.snr, 3), 10) << pad(fixed(row.pointwise_corr), 16)
       << fixed(row.arena_corr) << '\n';
  }
  return os.str();
}

int run_experiment(const ExperimentFlags& f) {
  auto path = resolve_config_path(f.config);
  if (!path) {
    std::cerr << "error: no config given (use --config or " << kConfigEnvVar << ")\n";
    return kInputError;
  }
  AppConfig cfg;
  try {
    cfg = load_config(*path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  ExperimentSettings& x = cfg.experiment;
  if (f.seed) {
    x.group.seed = *f.seed;
    x.collapse.seed = *f.seed;
  }
  if (f.trials) x.trials = x.collapse.trials = *f.trials;
  if (f.workers) x.workers = x.collapse.workers = *f.workers;
  x.collapse.noise = cfg.judge.noise;

  fs::create_directories(f.out_dir);
  std::ofstream records(fs::path(f.out_dir) / "results.jsonl");
  std::string summary;
  try {
    if (x.kind == ExperimentKind::fidelity) {
      const auto report = lab::run_fidelity_experiment(x.group, cfg.judge.noise, x.trials, x.topologies, x.workers);
      for (const auto& row : report.rows) {
        records << json{{"experiment", "fidelity"},
                        {"topology", to_string(row.topology)},
                        {"n", report.spec.n},
                        {"utility_spread", report.spec.utility_spread},
                        {"noise", report.noise},
                        {"trials", report.trials},
                        {"seed", report.spec.seed},
                        {"tau_truth_mean", row.tau_truth_mean},
                        {"tau_truth_std", row.tau_truth_std},
                        {"tau_round_robin_mean", row.tau_round_robin_mean},
                        {"tau_round_robin_std", row.tau_round_robin_std},
                        {"top1_accuracy", row.top1_accuracy},
                        {"mean_comparisons", row.mean_comparisons}}
                       .dump()
                << '\n';
      }
      summary = fidelity_summary(report);
    } else {
      const auto report = lab::run_collapse_experiment(x.collapse);
      for (const auto& row : report.rows) {
        records << json{{"experiment", "collapse"},
                        {"utility_spread", row.spread},
                        {"n", report.config.n},
                        {"noise", report.config.noise},
                        {"trials", report.config.trials},
                        {"seed", report.config.seed},
                        {"snr", row.snr},
                        {"pointwise_corr", row.pointwise_corr},
                        {"arena_corr", row.arena_corr}}
                       .dump()
                << '\n';
      }
      summary = collapse_summary(report);
    }
  } catch (const PreconditionError& e) {
    std::cerr << "error: topology " << e.topology << ": " << e.reason << '\n';
    return kPrecondition;
  }
  std::ofstream(fs::path(f.out_dir) / "summary.txt") << summary;
  std::cout << summary;
  return kOk;
}

// ---------------------------------------------------------------------------
// serve
// ---------------------------------------------------------------------------

RewardService* g_service = nullptr;

int run_serve(const std::optional<std::string>& config, std::optional<int> port, std::optional<std::string> host) {
  AppConfig cfg;
  try {
    cfg = load_optional_config(config);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  ServiceSettings s = cfg.service;
  if (port) s.port = *port;
  if (host) s.host = *host;
  if (s.judges.empty()) s.judges["default"] = cfg.judge;

  RewardService service(s, cfg.topology.epsilon);
  const int bound = service.bind();
  if (bound < 0) {
    std::cerr << "error: cannot bind " << s.host << ":" << s.port << '\n';
    return kFailure;
  }
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cout << "listening on " << s.host << ":" << bound << std::endl;
  service.listen();
  g_service = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tournament-based relative ranking and advantage estimation for trajectory groups"};
  app.require_subcommand(1);

  RankFlags rf;
  auto* rank_cmd = app.add_subcommand("rank", "Rank a group file with one topology");
  rank_cmd->add_option("--topology", rf.topology, "round-robin | anchor | seeded-single-elim | double-elim | swiss")
      ->required();
  rank_cmd->add_option("--in", rf.in, "Group file (one trajectory JSON object per line)");
  rank_cmd->add_option("--config", rf.config, "Config file (default: $ARENA_RANK_CONFIG)");
  rank_cmd->add_option("--judge", rf.judge, "sim | pointwise-sim | replay | remote");
  rank_cmd->add_option("--seed", rf.seed, "Seed for the judge and the topology shuffle");
  rank_cmd->add_option("--replay-log", rf.replay_log, "Match log for --judge replay");
  rank_cmd->add_option("--endpoint", rf.endpoint, "URL for --judge remote");
  rank_cmd->add_option("--noise-sigma", rf.noise_sigma, "Simulated judge Gaussian noise std");
  rank_cmd->add_option("--position-bias", rf.position_bias, "Simulated judge first-position bonus");
  rank_cmd->add_option("--quantization", rf.quantization, "Simulated judge score step");
  rank_cmd->add_option("--score-scale", rf.score_scale, "Simulated judge utility scale");
  rank_cmd->add_option("--epsilon", rf.epsilon, "Advantage stabilizer");
  rank_cmd->add_option("--swiss-rounds", rf.swiss_rounds, "Swiss rounds (default ceil(log2 N))");
  rank_cmd->add_option("--parallelism", rf.parallelism, "Concurrent matches per round");
  rank_cmd->add_option("--group-id", rf.group_id, "Group id used in match keys");
  rank_cmd->add_option("--rubric", rf.rubric, "Rubric text passed to the judge");
  rank_cmd->add_option("--rubric-id", rf.rubric_id, "Rubric id");
  rank_cmd->add_option("--out", rf.out, "Write the full response JSON here");
  rank_cmd->add_option("--match-log", rf.match_log, "Append the match log (JSON lines) here");
  rank_cmd->add_flag("--budget-only", rf.budget_only, "Print the comparison budget for -n and exit");
  rank_cmd->add_option("-n", rf.n, "Group size for --budget-only");

  ExperimentFlags ef;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a fidelity or collapse experiment from a config file");
  exp_cmd->add_option("--config", ef.config, "Config file (default: $ARENA_RANK_CONFIG)");
  exp_cmd->add_option("--seed", ef.seed, "Override the experiment master seed");
  exp_cmd->add_option("--trials", ef.trials, "Override the trial count");
  exp_cmd->add_option("--workers", ef.workers, "Worker threads (0 = hardware concurrency)");
  exp_cmd->add_option("--out-dir", ef.out_dir, "Directory for results.jsonl and summary.txt");

  std::optional<std::string> serve_config;
  std::optional<int> serve_port;
  std::optional<std::string> serve_host;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP reward service");
  serve_cmd->add_option("--config", serve_config, "Config file (default: $ARENA_RANK_CONFIG)");
  serve_cmd->add_option("--port", serve_port, "Port (0 picks a free one)");
  serve_cmd->add_option("--host", serve_host, "Bind address");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rank_cmd) return run_rank(rf);
    if (*exp_cmd) return run_experiment(ef);
    if (*serve_cmd) return run_serve(serve_config, serve_port, serve_host);
  } catch (const UnknownKeysError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
