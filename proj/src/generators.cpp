#include "cascade/generators.hpp"

#include <cmath>
#include <random>

#include "cascade/rng.hpp"

namespace cascade {

namespace {

Instance tabular(std::string name, std::size_t n, std::vector<Edge> edges,
                 const std::vector<double>& probs) {
  Instance inst;
  inst.name = std::move(name);
  inst.graph = DirectedGraph(n, std::move(edges));
  inst.features = build_tabular_features(inst.graph);
  inst.theta = tabular_theta_for(inst.graph, probs);
  return inst;
}

void check_probability(double p, const char* what) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument(std::string(what) + " must lie in (0,1]");
}

std::vector<Edge> er_edges(std::size_t n, double p_edge, Rng& rng) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v)
      if (u != v && rng.uniform() < p_edge) edges.push_back({u, v});
  return edges;
}

}  // namespace

Instance fig1_instance() {
  return tabular("fig1", 4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, {1.0, 1.0, 0.6, 0.3});
}

Instance chain_instance(std::size_t n, double p) {
  if (n < 2) throw std::invalid_argument("chain needs at least 2 nodes");
  check_probability(p, "chain p");
  std::vector<Edge> edges;
  for (NodeId i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return tabular("chain" + std::to_string(n), n, edges, std::vector<double>(n - 1, p));
}

Instance er_instance(std::size_t n, double p_edge, double p_target, std::uint64_t seed) {
  check_probability(p_target, "er p_target");
  Rng rng(derive_seed(seed, {0xE5}));
  std::vector<Edge> edges = er_edges(n, p_edge, rng);
  if (edges.empty()) throw InstanceError("er graph drew no edges; try another seed");
  const std::size_t m = edges.size();
  return tabular("er" + std::to_string(n), n, std::move(edges), std::vector<double>(m, p_target));
}

Instance star_instance(std::size_t parents, double p) {
  if (parents < 1) throw std::invalid_argument("star needs at least one parent");
  check_probability(p, "star p");
  std::vector<Edge> edges;
  for (NodeId u = 0; u < parents; ++u) edges.push_back({u, static_cast<NodeId>(parents)});
  return tabular("star" + std::to_string(parents), parents + 1, edges,
                 std::vector<double>(parents, p));
}

Instance feature_instance(std::size_t n, double p_edge, std::size_t d, double theta_norm,
                          std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("feature dimension must be >= 1");
  if (!(theta_norm > 0.0)) throw std::invalid_argument("theta_norm must be > 0");
  Rng rng(derive_seed(seed, {0xFEA7}));
  std::vector<Edge> edges = er_edges(n, p_edge, rng);
  if (edges.size() < d) throw InstanceError("feature graph has fewer edges than the dimension");

  Instance inst;
  inst.name = "features" + std::to_string(n) + "d" + std::to_string(d);
  inst.graph = DirectedGraph(n, std::move(edges));
  std::normal_distribution<double> normal;
  Matrix x(static_cast<Eigen::Index>(inst.graph.edge_count()), static_cast<Eigen::Index>(d));
  for (EdgeId e = 0; e < inst.graph.edge_count(); ++e) {
    Vector g(static_cast<Eigen::Index>(d));
    for (auto& c : g) c = std::abs(normal(rng)) + 1e-3;
    x.row(e) = (g / g.norm() / static_cast<double>(inst.graph.in_degree(inst.graph.edge(e).target)))
                   .transpose();
  }
  inst.features = FeatureMap(std::move(x));
  Vector theta(static_cast<Eigen::Index>(d));
  for (auto& c : theta) c = 0.5 + rng.uniform();
  inst.theta = theta_norm * theta / theta.norm();
  return inst;
}

Instance generate_graph(const std::string& kind, const nlohmann::json& params, std::uint64_t seed) {
  auto get = [&](const char* key, auto fallback) {
    return params.is_object() ? params.value(key, fallback) : fallback;
  };
  Instance inst;
  if (kind == "fig1") {
    inst = fig1_instance();
  } else if (kind == "chain") {
    inst = chain_instance(get("n", std::size_t{5}), get("p", 0.5));
  } else if (kind == "er") {
    inst = er_instance(get("n", std::size_t{8}), get("p_edge", 0.3), get("p_target", 0.2),
                       get("seed", seed));
  } else if (kind == "star") {
    inst = star_instance(get("parents", std::size_t{3}), get("p", 0.4));
  } else if (kind == "features") {
    inst = feature_instance(get("n", std::size_t{8}), get("p_edge", 0.3), get("d", std::size_t{3}),
                            get("theta_norm", 1.0), get("seed", seed));
  } else if (kind == "file") {
    inst = load_instance(get("path", std::string{}));
  } else {
    throw std::invalid_argument("unknown graph kind '" + kind + "'");
  }
  return inst;
}

std::vector<Instance> small_fixtures() {
  std::vector<Instance> out;
  out.push_back(fig1_instance());
  out.push_back(chain_instance(6, 0.5));
  out.push_back(star_instance(4, 0.4));
  out.push_back(er_instance(8, 0.3, 0.2, 1));
  out.push_back(er_instance(7, 0.35, 0.45, 2));
  return out;
}

}  // namespace cascade
