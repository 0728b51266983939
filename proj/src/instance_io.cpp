#include "cascade/instance_io.hpp"

#include <cmath>
#include <fstream>

namespace cascade {

using nlohmann::json;

Vector tabular_theta_for(const DirectedGraph& graph, const std::vector<double>& probs) {
  if (probs.size() != graph.edge_count())
    throw InstanceError("expected one probability per edge");
  Vector theta(static_cast<Eigen::Index>(probs.size()));
  for (EdgeId k = 0; k < probs.size(); ++k) {
    const double p = probs[k];
    if (!(p > 0.0 && p <= 1.0))
      throw InstanceError("edge probability must lie in (0,1], got " + std::to_string(p));
    const double z = p >= 1.0 ? kSaturatedScore : inverse_link(p);
    theta(k) = z * static_cast<double>(graph.in_degree(graph.edge(k).target));
  }
  return theta;
}

Instance parse_instance(const json& j) {
  Instance inst;
  inst.name = j.value("name", std::string{});
  const auto n = j.at("nodes").get<std::size_t>();
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw InstanceError("edges must be [u,v] pairs");
    edges.push_back({e[0].get<NodeId>(), e[1].get<NodeId>()});
  }
  inst.graph = DirectedGraph(n, std::move(edges));

  const auto& f = j.at("features");
  if (f.is_string()) {
    if (f.get<std::string>() != "tabular")
      throw InstanceError("features must be \"tabular\" or a matrix");
    inst.features = build_tabular_features(inst.graph);
  } else {
    if (f.size() != inst.graph.edge_count())
      throw InstanceError("features must have one row per edge");
    const std::size_t d = f.empty() ? j.at("theta").size() : f[0].size();
    Matrix x(static_cast<Eigen::Index>(f.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < f.size(); ++r) {
      if (f[r].size() != d) throw InstanceError("ragged feature rows");
      for (std::size_t c = 0; c < d; ++c) x(r, c) = f[r][c].get<double>();
    }
    inst.features = FeatureMap(std::move(x));
  }

  if (j.contains("theta")) {
    const auto t = j.at("theta").get<std::vector<double>>();
    inst.theta = Eigen::Map<const Vector>(t.data(), static_cast<Eigen::Index>(t.size()));
  } else if (j.contains("probabilities")) {
    if (!inst.features.tabular())
      throw InstanceError("\"probabilities\" is only supported with tabular features");
    inst.theta = tabular_theta_for(inst.graph, j.at("probabilities").get<std::vector<double>>());
  } else {
    throw InstanceError("instance needs \"theta\" or \"probabilities\"");
  }
  if (static_cast<std::size_t>(inst.theta.size()) != inst.features.dimension())
    throw InstanceError("theta dimension does not match features");
  return inst;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file " + path.string());
  Instance inst = parse_instance(json::parse(in));
  if (inst.name.empty()) inst.name = path.stem().string();
  return inst;
}

json instance_to_json(const Instance& inst) {
  json j;
  if (!inst.name.empty()) j["name"] = inst.name;
  j["nodes"] = inst.graph.node_count();
  j["edges"] = json::array();
  for (const auto& e : inst.graph.edges()) j["edges"].push_back({e.source, e.target});
  if (inst.features.tabular()) {
    j["features"] = "tabular";
  } else {
    j["features"] = json::array();
    const auto& x = inst.features.matrix();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      std::vector<double> row;
      for (Eigen::Index c = 0; c < x.cols(); ++c) row.push_back(x(r, c));
      j["features"].push_back(row);
    }
  }
  j["theta"] = std::vector<double>(inst.theta.data(), inst.theta.data() + inst.theta.size());
  return j;
}

}  // namespace cascade
