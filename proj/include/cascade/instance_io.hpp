#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cascade/graph.hpp"

namespace cascade {

/// Graph, features and generating parameter of one IC instance.
struct Instance {
  std::string name;
  DirectedGraph graph;
  FeatureMap features;
  Vector theta;
};

/// Reads { "nodes": n, "edges": [[u,v],...], "features": [[...],...] | "tabular",
/// "theta": [...] }. "theta" may be replaced by "probabilities": [...] (one per
/// edge, tabular only); p = 1 saturates to kSaturatedScore.
Instance parse_instance(const nlohmann::json& j);
Instance load_instance(const std::filesystem::path& path);
nlohmann::json instance_to_json(const Instance& inst);

/// Score used for probability-one edges: 1 - exp(-40) rounds to 1.0 in double.
inline constexpr double kSaturatedScore = 40.0;

/// theta such that tabular edge k has probability probs[k].
Vector tabular_theta_for(const DirectedGraph& graph, const std::vector<double>& probs);

}  // namespace cascade
