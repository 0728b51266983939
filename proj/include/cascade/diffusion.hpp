#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cascade/graph.hpp"

namespace cascade {

/// One censored observation: the parents that newly became active at step-1
/// jointly attempt `target`; only whether `target` activated is seen.
struct HyperEdgeObservation {
  std::uint32_t step = 0;
  NodeId target = 0;
  std::vector<NodeId> parents;  // ascending
  Vector feature;               // sum of x_{u,target} over parents
  bool outcome = false;
};

struct CascadeTrace {
  std::vector<std::optional<std::uint32_t>> activated_at;
  std::vector<HyperEdgeObservation> observations;  // step order, then target order
  std::size_t spread = 0;
};

enum class CascadeMode {
  hyper_edge,      // one Bernoulli(m(x_b^T theta)) draw per (target, step)
  per_edge_debug,  // independent per-edge coins OR-ed together
};

/// Edge scores z_e = x_e^T theta for one parameter, clamped at 0 so that every
/// parameter yields valid probabilities. Holds non-owning pointers: the graph
/// and features must outlive the model.
class SpreadModel {
 public:
  SpreadModel(const DirectedGraph& graph, const FeatureMap& features, const Vector& theta);
  /// Model given probabilities directly (no features; observation features empty).
  SpreadModel(const DirectedGraph& graph, const std::vector<double>& probabilities);

  const DirectedGraph& graph() const { return *graph_; }
  const FeatureMap* features() const { return features_; }
  std::span<const double> scores() const { return scores_; }
  double edge_probability(EdgeId e) const { return link(scores_[e]); }

 private:
  const DirectedGraph* graph_;
  const FeatureMap* features_ = nullptr;
  std::vector<double> scores_;
};

/// Time-stepped IC cascade. Pure function of (model, seeds, cascade_seed).
/// Throws std::out_of_range on a seed index outside the graph.
CascadeTrace simulate_cascade(const SpreadModel& model, std::span<const NodeId> seeds,
                              std::uint64_t cascade_seed,
                              CascadeMode mode = CascadeMode::hyper_edge);
CascadeTrace simulate_cascade(const DirectedGraph& graph, const FeatureMap& fm,
                              const Vector& theta, std::span<const NodeId> seeds,
                              std::uint64_t cascade_seed,
                              CascadeMode mode = CascadeMode::hyper_edge);

/// Number of activated nodes only; same draws as simulate_cascade.
std::size_t simulate_spread(const SpreadModel& model, std::span<const NodeId> seeds,
                            std::uint64_t cascade_seed);

struct SpreadEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo spread; cascade i uses derive_seed(base_seed, {i}), so calls
/// sharing base_seed use common random numbers.
SpreadEstimate mc_influence(const SpreadModel& model, std::span<const NodeId> seeds,
                            std::size_t n_samples, std::uint64_t base_seed);

inline constexpr std::size_t kExactInfluenceMaxEdges = 24;

/// Exact expected spread by enumerating live-edge realizations.
/// Throws std::length_error above kExactInfluenceMaxEdges edges.
double exact_influence(const SpreadModel& model, std::span<const NodeId> seeds);
double exact_influence(const DirectedGraph& graph, const FeatureMap& fm, const Vector& theta,
                       std::span<const NodeId> seeds);

/// A set of edges sharing one follower node.
struct RelevantEdgeSet {
  NodeId follower = 0;
  std::vector<EdgeId> edges;
  friend bool operator==(const RelevantEdgeSet&, const RelevantEdgeSet&) = default;
  friend auto operator<=>(const RelevantEdgeSet&, const RelevantEdgeSet&) = default;
};

/// For each v not in S, every nonempty subset of a follower's in-edges inside
/// the subgraph of S->v paths. Entries for seed nodes are empty.
std::vector<std::vector<RelevantEdgeSet>> relevant_edge_sets(const DirectedGraph& graph,
                                                            std::span<const NodeId> seeds);

struct GsDiagnostic {
  struct Row {
    RelevantEdgeSet set;
    std::size_t relevant_count = 0;  // N_{S,b}
    double observed_freq = 0.0;      // P_{S,b}
  };
  std::vector<Row> rows;
  double g_s = 0.0;  // sum of P_{S,b} N_{S,b}^2
};

/// G_S with P_{S,b} estimated as the fraction of n cascades observing b.
GsDiagnostic gs_statistic(const SpreadModel& model, std::span<const NodeId> seeds,
                          std::size_t n_cascades, std::uint64_t base_seed);

/// Debug dump: one JSON object per line {step, target, parents, y}.
void write_trace_jsonl(std::ostream& out, const CascadeTrace& trace);

}  // namespace cascade
