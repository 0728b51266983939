#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cascade/diffusion.hpp"
#include "cascade/estimator.hpp"

namespace cascade {

/// Seed nodes in selection order.
using SeedSet = std::vector<NodeId>;

/// f(S, p) for a fixed parameter. `crn_seed` selects the random stream, so
/// equal seeds mean common random numbers across seed sets.
class SpreadEvaluator {
 public:
  virtual ~SpreadEvaluator() = default;
  virtual SpreadEstimate evaluate(std::span<const NodeId> seeds, std::uint64_t crn_seed) const = 0;
  virtual std::size_t node_count() const = 0;
};

class ExactSpread final : public SpreadEvaluator {
 public:
  explicit ExactSpread(SpreadModel model) : model_(std::move(model)) {}
  SpreadEstimate evaluate(std::span<const NodeId> seeds, std::uint64_t) const override {
    return {exact_influence(model_, seeds), 0.0, 0};
  }
  std::size_t node_count() const override { return model_.graph().node_count(); }

 private:
  SpreadModel model_;
};

class MonteCarloSpread final : public SpreadEvaluator {
 public:
  MonteCarloSpread(SpreadModel model, std::size_t n_samples)
      : model_(std::move(model)), n_samples_(n_samples) {}
  SpreadEstimate evaluate(std::span<const NodeId> seeds, std::uint64_t crn_seed) const override {
    return mc_influence(model_, seeds, n_samples_, crn_seed);
  }
  std::size_t node_count() const override { return model_.graph().node_count(); }

 private:
  SpreadModel model_;
  std::size_t n_samples_;
};

struct GreedyOptions {
  bool lazy = false;  // CELF-style stale-gain queue
};

struct GreedyResult {
  SeedSet seeds;
  SpreadEstimate value;  // estimate of f(seeds) from the last greedy step
};

/// Adds the node with the largest estimated marginal gain K times; all
/// candidates within a step share one random stream; ties go to the smallest
/// index. Throws std::invalid_argument unless 1 <= K <= node count.
GreedyResult greedy_im(const SpreadEvaluator& eval, std::size_t K, std::uint64_t seed,
                       const GreedyOptions& opts = {});
SeedSet greedy_im(const DirectedGraph& graph, const FeatureMap& fm, const Vector& theta,
                  std::size_t K, std::size_t n_mc, std::uint64_t seed);

struct PairOracleOptions {
  std::size_t K = 1;
  std::size_t m_rand = 0;  // boundary samples; 0 means 2d
  std::size_t n_mc = 200;
  double norm_bound = std::numeric_limits<double>::infinity();
  bool exact = false;  // exact_influence instead of Monte Carlo
};

struct OracleCandidate {
  Vector theta;
  std::string origin;  // "center", "axis+j", "axis-j", "boundary"
  SeedSet seeds;
  SpreadEstimate value;
};

struct OraclePair {
  SeedSet seeds;
  Vector theta;
  SpreadEstimate value;
  std::size_t candidate_index = 0;
  bool degenerate = false;  // singular shape or unbounded radius: center only
  std::vector<OracleCandidate> candidates;
};

/// Greedy under each of: the center, center +- (c / sqrt(lambda_j)) u_j, and
/// m_rand whitened boundary points; each pulled toward the center until
/// ||theta|| <= norm_bound. Returns the pair with the largest estimate.
OraclePair pair_oracle(const DirectedGraph& graph, const FeatureMap& fm,
                       const ConfidenceEllipsoid& ell, const PairOracleOptions& opts,
                       std::uint64_t seed);

/// Runs greedy under each candidate theta (shared greedy seed) and returns the
/// candidate with the largest estimate; ties keep the earlier candidate.
OraclePair best_candidate(const DirectedGraph& graph, const FeatureMap& fm,
                          std::vector<OracleCandidate> candidates, const PairOracleOptions& opts,
                          std::uint64_t seed);

struct ExhaustiveResult {
  SeedSet seeds;
  double value = 0.0;
};

inline constexpr double kExhaustiveMaxSets = 1e5;

/// Maximizer of exact_influence over all seed sets of size <= K. Only sets of
/// size min(K, n) are enumerated (spread is monotone); the lexicographically
/// earliest maximizer wins. Throws std::length_error
/// when C(n, K) > 1e5 or the edge guard of exact_influence is exceeded.
ExhaustiveResult exhaustive_opt(const SpreadModel& model, std::size_t K);
ExhaustiveResult exhaustive_opt(const DirectedGraph& graph, const FeatureMap& fm,
                                const Vector& theta, std::size_t K);

/// Candidate table: index,origin,seed_set,value,se,theta.
void write_candidate_table_csv(std::ostream& out, const OraclePair& pair);

std::string format_seed_set(std::span<const NodeId> seeds);

}  // namespace cascade
