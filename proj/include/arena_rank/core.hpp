#pragma once

// Domain types shared by the judge, tournament, advantage and lab layers.

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace arena_rank {

inline constexpr const char* kEngineVersion = "0.3.0";

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller passed data that breaks an operation's contract (length mismatch,
// non-permutation ranks, ...).
struct ContractError : Error {
  using Error::Error;
};

// A topology's structural precondition is not met (missing anchor, bad N).
struct PreconditionError : Error {
  PreconditionError(std::string topology, std::string reason)
      : Error(topology + ": " + reason),
        topology(std::move(topology)),
        reason(std::move(reason)) {}
  std::string topology;
  std::string reason;
};

// Backend misconfiguration, e.g. a simulated judge asked to score a
// trajectory that carries no latent utility.
struct ConfigError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct Step {
  std::string thought;
  std::optional<std::string> tool_call;
  std::optional<std::string> tool_response;

  bool operator==(const Step&) const = default;
};

struct Trajectory {
  std::string id;
  std::string query;
  std::vector<Step> steps;
  std::string answer;
  std::optional<double> latent_utility;
  std::optional<double> likelihood_ratio;
  std::optional<double> kl_estimate;

  bool operator==(const Trajectory&) const = default;
};

struct Rubric {
  std::string text;
  std::string id;

  bool operator==(const Rubric&) const = default;
};

struct TrajectoryGroup {
  std::string group_id;
  std::string query;
  std::vector<Trajectory> trajectories;
  std::optional<std::size_t> anchor_index;
  Rubric rubric;

  std::size_t size() const { return trajectories.size(); }
  bool has_anchor() const { return anchor_index.has_value(); }

  bool operator==(const TrajectoryGroup&) const = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  std::string code;     // stable machine-readable tag, e.g. "duplicate id"
  std::string message;  // human-readable detail

  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

/// Lists every invariant violation in `group`; an empty report means valid.
inline ValidationReport validate_group(const TrajectoryGroup& group) {
  ValidationReport report;
  auto add = [&](std::string code, std::string message) {
    report.push_back({std::move(code), std::move(message)});
  };

  if (group.trajectories.size() < 2) {
    add("group too small", "group has " + std::to_string(group.trajectories.size()) +
                               " trajectories; at least 2 are required");
  }
  if (group.rubric.text.empty()) {
    add("empty rubric", "rubric text must be nonempty");
  }
  if (group.anchor_index && *group.anchor_index >= group.trajectories.size()) {
    add("anchor out of range", "anchor_index " + std::to_string(*group.anchor_index) +
                                   " is outside the group");
  }

  std::set<std::string> seen;
  for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
    const Trajectory& t = group.trajectories[i];
    const std::string where = "trajectory #" + std::to_string(i);
    if (t.id.empty()) {
      add("empty id", where + " has an empty id");
    } else if (!seen.insert(t.id).second) {
      add("duplicate id", where + " repeats id '" + t.id + "'");
    }
    if (t.query != group.query) {
      add("query mismatch", where + " does not share the group query");
    }
    if (t.latent_utility && !(*t.latent_utility >= 0.0 && *t.latent_utility <= 1.0)) {
      add("latent utility out of range", where + " latent_utility must lie in [0,1]");
    }
    if (t.likelihood_ratio && !(*t.likelihood_ratio > 0.0)) {
      add("nonpositive likelihood ratio", where + " likelihood_ratio must be > 0");
    }
    if (t.kl_estimate && !(*t.kl_estimate >= 0.0)) {
      add("negative kl estimate", where + " kl_estimate must be >= 0");
    }
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
      if (t.steps[k].tool_response && !t.steps[k].tool_call) {
        add("orphan tool response", where + " step " + std::to_string(k) +
                                        " has a tool_response without a tool_call");
      }
    }
  }
  return report;
}

inline bool report_contains(const ValidationReport& report, std::string_view code) {
  for (const auto& v : report) {
    if (v.code == code) return true;
  }
  return false;
}

}  // namespace arena_rank
