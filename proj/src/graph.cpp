#include "cascade/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "cascade/rng.hpp"

namespace cascade {

namespace {

constexpr std::size_t kExactSubsetMaxDegree = 20;
constexpr std::size_t kSampledSubsets = 10000;
constexpr double kNormSlack = 1e-12;

std::string describe_subset(const DirectedGraph& graph, NodeId v,
                            const std::vector<EdgeId>& subset) {
  std::ostringstream os;
  os << "node " << v << ", parents {";
  for (std::size_t i = 0; i < subset.size(); ++i)
    os << (i ? "," : "") << graph.edge(subset[i]).source;
  os << "}";
  return os.str();
}

}  // namespace

DirectedGraph::DirectedGraph(std::size_t node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
  if (node_count_ == 0) throw InstanceError("graph must have at least one node");
  in_edges_.assign(node_count_, {});
  out_edges_.assign(node_count_, {});
  std::set<std::pair<NodeId, NodeId>> seen;
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    const auto [u, v] = edges_[e];
    if (u >= node_count_ || v >= node_count_) {
      std::ostringstream os;
      os << "edge " << e << " (" << u << "," << v << ") references a node outside [0,"
         << node_count_ << ")";
      throw InstanceError(os.str());
    }
    if (u == v) throw InstanceError("self-loop at node " + std::to_string(u));
    if (!seen.emplace(u, v).second) {
      std::ostringstream os;
      os << "duplicate edge (" << u << "," << v << ")";
      throw InstanceError(os.str());
    }
    in_edges_[v].push_back(e);
    out_edges_[u].push_back(e);
  }
}

std::vector<NodeId> DirectedGraph::in_neighbors(NodeId v) const {
  std::vector<NodeId> out;
  for (EdgeId e : in_edges(v)) out.push_back(edges_[e].source);
  return out;
}

std::optional<EdgeId> DirectedGraph::find_edge(NodeId u, NodeId v) const {
  for (EdgeId e : in_edges(v))
    if (edges_[e].source == u) return e;
  return std::nullopt;
}

FeatureMap::FeatureMap(Matrix features, bool tabular)
    : features_(std::move(features)), tabular_(tabular) {
  if (features_.cols() == 0) throw InstanceError("feature dimension must be positive");
}

Vector FeatureMap::sum_features(const DirectedGraph& graph, std::span<const NodeId> parents,
                                NodeId target) const {
  Vector x = Vector::Zero(features_.cols());
  for (NodeId u : parents) {
    auto e = graph.find_edge(u, target);
    if (!e) {
      std::ostringstream os;
      os << "node " << u << " is not a parent of node " << target;
      throw std::invalid_argument(os.str());
    }
    x += features_.row(*e).transpose();
  }
  return x;
}

FeatureMap build_tabular_features(const DirectedGraph& graph) {
  const auto m = graph.edge_count();
  if (m == 0) throw InstanceError("tabular features need at least one edge");
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (EdgeId k = 0; k < m; ++k)
    x(k, k) = 1.0 / static_cast<double>(graph.in_degree(graph.edge(k).target));
  return FeatureMap(std::move(x), true);
}

double link(double z) { return -std::expm1(-z); }

double log_link(double z) {
  // ln(1 - e^{-z}): expm1 keeps precision for small z, log1p for large z.
  if (z < M_LN2) return std::log(-std::expm1(-z));
  return std::log1p(-std::exp(-z));
}

double inverse_link(double p) {
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::log1p(-p);
}

double edge_prob(const Vector& x, const Vector& theta) { return link(x.dot(theta)); }

std::vector<double> edge_scores(const FeatureMap& fm, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != fm.dimension())
    throw std::invalid_argument("theta dimension does not match features");
  const Vector z = fm.matrix() * theta;
  return {z.data(), z.data() + z.size()};
}

std::vector<double> edge_probabilities(const FeatureMap& fm, const Vector& theta) {
  auto z = edge_scores(fm, theta);
  for (double& v : z) v = link(v);
  return z;
}

double aggregated_prob(const DirectedGraph& graph, const FeatureMap& fm,
                       std::span<const NodeId> parents, NodeId v, const Vector& theta) {
  if (parents.empty()) throw std::invalid_argument("aggregated_prob: empty parent set");
  return link(fm.sum_features(graph, parents, v).dot(theta));
}

InstanceReport validate_instance(const DirectedGraph& graph, const FeatureMap& fm,
                                 const Vector& theta, std::uint64_t sample_seed) {
  if (fm.edge_count() != graph.edge_count())
    throw InstanceError("feature map has " + std::to_string(fm.edge_count()) +
                        " rows but the graph has " + std::to_string(graph.edge_count()) +
                        " edges");
  if (static_cast<std::size_t>(theta.size()) != fm.dimension())
    throw InstanceError("theta has dimension " + std::to_string(theta.size()) +
                        ", features have " + std::to_string(fm.dimension()));

  InstanceReport report;
  Rng rng(sample_seed);
  const auto d = static_cast<Eigen::Index>(fm.dimension());

  auto check_subset = [&](NodeId v, const std::vector<EdgeId>& subset) {
    Vector x = Vector::Zero(d);
    for (EdgeId e : subset) x += fm.matrix().row(e).transpose();
    const double norm = x.norm();
    if (norm > 1.0 + kNormSlack) {
      std::ostringstream os;
      os << "feature norm bound violated at " << describe_subset(graph, v, subset)
         << ": ||x(B,v)|| = " << norm;
      throw InstanceError(os.str());
    }
    report.max_subset_norm = std::max(report.max_subset_norm, norm);
    report.D = std::max(report.D, norm * norm * norm * norm);
  };

  for (NodeId v = 0; v < graph.node_count(); ++v) {
    const auto in = graph.in_edges(v);
    const std::size_t k = in.size();
    if (k == 0) continue;
    std::vector<EdgeId> subset;
    if (k <= kExactSubsetMaxDegree) {
      for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
        subset.clear();
        for (std::size_t i = 0; i < k; ++i)
          if (mask >> i & 1U) subset.push_back(in[i]);
        check_subset(v, subset);
      }
    } else {
      report.exact_subset_check = false;
      report.warnings.push_back("node " + std::to_string(v) + " has in-degree " +
                                std::to_string(k) + "; subset norm check is sampled");
      subset.assign(in.begin(), in.end());
      check_subset(v, subset);
      for (std::size_t s = 0; s < kSampledSubsets; ++s) {
        subset.clear();
        for (std::size_t i = 0; i < k; ++i)
          if (rng() & 1U) subset.push_back(in[i]);
        if (!subset.empty()) check_subset(v, subset);
      }
    }
  }

  report.p_min = std::numeric_limits<double>::infinity();
  const auto z = edge_scores(fm, theta);
  for (EdgeId e = 0; e < z.size(); ++e) {
    if (!(z[e] > 0.0)) {
      std::ostringstream os;
      os << "edge " << e << " (" << graph.edge(e).source << "," << graph.edge(e).target
         << ") has x_e^T theta = " << z[e] << " <= 0";
      throw InstanceError(os.str());
    }
    report.p_min = std::min(report.p_min, link(z[e]));
  }
  if (z.empty()) report.p_min = 1.0;
  report.R = 1.0 / report.p_min;
  return report;
}

}  // namespace cascade
