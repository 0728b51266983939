#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascade/linalg.hpp"

namespace cascade {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Edge {
  NodeId source;
  NodeId target;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Raised when an instance breaks a structural or modelling assumption.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Directed graph with edges kept in insertion order; edge k is e_k.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  /// Throws InstanceError on self-loops, duplicate edges or bad indices.
  DirectedGraph(std::size_t node_count, std::vector<Edge> edges);

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }

  std::span<const EdgeId> in_edges(NodeId v) const { return in_edges_.at(v); }
  std::span<const EdgeId> out_edges(NodeId u) const { return out_edges_.at(u); }
  std::vector<NodeId> in_neighbors(NodeId v) const;
  std::size_t in_degree(NodeId v) const { return in_edges_.at(v).size(); }
  std::optional<EdgeId> find_edge(NodeId u, NodeId v) const;

 private:
  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> in_edges_;
  std::vector<std::vector<EdgeId>> out_edges_;
};

/// Dense per-edge feature vectors; row e is x_e.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(Matrix features, bool tabular = false);

  std::size_t dimension() const { return static_cast<std::size_t>(features_.cols()); }
  std::size_t edge_count() const { return static_cast<std::size_t>(features_.rows()); }
  Vector feature(EdgeId e) const { return features_.row(e).transpose(); }
  const Matrix& matrix() const { return features_; }
  bool tabular() const { return tabular_; }

  /// x(B, v): sum of the features of edges (u, v) for u in the parent set.
  Vector sum_features(const DirectedGraph& graph, std::span<const NodeId> parents,
                      NodeId target) const;

 private:
  Matrix features_;
  bool tabular_ = false;
};

/// Tabular features: x_{e_k} = e_k / d_k with d_k the in-degree of e_k's target.
FeatureMap build_tabular_features(const DirectedGraph& graph);

/// Link m(z) = 1 - exp(-z).
double link(double z);
/// ln m(z) for z > 0, stable near 0 and for large z.
double log_link(double z);
/// Inverse link: z with m(z) = p. p = 1 maps to +inf.
double inverse_link(double p);

double edge_prob(const Vector& x, const Vector& theta);

/// Per-edge linear scores z_e = x_e^T theta.
std::vector<double> edge_scores(const FeatureMap& fm, const Vector& theta);
std::vector<double> edge_probabilities(const FeatureMap& fm, const Vector& theta);

/// Probability that at least one parent in `parents` activates v:
/// m(x(B,v)^T theta). Throws std::invalid_argument on an empty set or a
/// parent that is not an in-neighbour of v.
double aggregated_prob(const DirectedGraph& graph, const FeatureMap& fm,
                       std::span<const NodeId> parents, NodeId v, const Vector& theta);

struct InstanceReport {
  bool exact_subset_check = true;  // false when some in-degree forced sampling
  double max_subset_norm = 0.0;    // max ||x(B,v)|| over checked subsets
  double p_min = 0.0;
  double R = 0.0;                  // 1 / p_min
  double D = 0.0;                  // max ||x_B||^4 over checked subsets
  std::vector<std::string> warnings;
};

/// Checks ||x(B,v)|| <= 1 for every parent subset (exact up to in-degree 20,
/// 10^4 sampled subsets beyond) and x_e^T theta > 0 on every edge.
/// Throws InstanceError naming the offending node/subset or edge.
InstanceReport validate_instance(const DirectedGraph& graph, const FeatureMap& fm,
                                 const Vector& theta, std::uint64_t sample_seed = 0);

}  // namespace cascade
