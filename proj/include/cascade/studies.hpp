#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cascade/bandit.hpp"

namespace cascade {

struct ExperimentSpec {
  std::string study = "single_run";  // coverage | rho | regret_scaling | censoring | single_run
  std::string instance_kind = "fig1";
  nlohmann::json instance_params = nlohmann::json::object();
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  AlgoConfig algo;
  std::vector<std::size_t> T_grid;     // regret_scaling
  std::size_t cascades = 2000;         // offline studies
  double delta = 0.05;                 // coverage: delta1 = delta2
  std::vector<NodeId> seeds = {0};     // censoring seed set
  nlohmann::json thresholds = nlohmann::json::object();
  std::filesystem::path out;           // empty: nothing written
  std::size_t jobs = 1;
};

/// Throws std::invalid_argument on unknown study kinds, zero replications or
/// malformed fields.
ExperimentSpec parse_experiment_spec(const nlohmann::json& j);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
AlgoConfig parse_algo_config(const nlohmann::json& j);

struct StudySummary {
  std::string study;
  bool passed = false;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json thresholds = nlohmann::json::object();
  std::vector<std::string> errors;

  nlohmann::json to_json() const;
};

/// Runs one study. Component failures end up in `errors` with passed = false.
/// Writes summary.json (and per-run files) under spec.out when set.
StudySummary run_study(const ExperimentSpec& spec);

/// Calls fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// Least-squares slope of y on x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Mean per-round regret over the last 10% of rounds divided by the first 10%.
double late_early_ratio(const std::vector<RoundLog>& logs);

/// Exploration-style observations: cascade i seeds the source of design edge
/// i mod d. Used by the offline studies.
ObservationSet exploration_observations(const Instance& inst, const ExplorationDesign& design,
                                        std::size_t cascades, std::uint64_t seed);

}  // namespace cascade
