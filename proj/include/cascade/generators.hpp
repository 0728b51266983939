#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cascade/instance_io.hpp"

namespace cascade {

/// Four-node diamond O->A, O->B, A->C, B->C with p = {1, 1, 0.6, 0.3}.
Instance fig1_instance();
/// Path 0->1->...->n-1, every edge with probability p (tabular).
Instance chain_instance(std::size_t n, double p);
/// Directed Erdos-Renyi graph; tabular features and all p_e = p_target.
Instance er_instance(std::size_t n, double p_edge, double p_target, std::uint64_t seed);
/// Parents 0..k-1 all pointing at node k, every edge with probability p.
Instance star_instance(std::size_t parents, double p);
/// Erdos-Renyi graph with d-dimensional nonnegative features scaled by
/// 1/in-degree (so every parent-set sum has norm <= 1) and a positive theta of
/// norm theta_norm.
Instance feature_instance(std::size_t n, double p_edge, std::size_t d, double theta_norm,
                          std::uint64_t seed);

/// kind in {fig1, chain, er, star, features, file}; params hold the arguments
/// by name (n, p, p_edge, p_target, parents, d, theta_norm, path).
/// Throws std::invalid_argument on an unknown kind.
Instance generate_graph(const std::string& kind, const nlohmann::json& params, std::uint64_t seed);

/// Five small tabular instances (at most 8 nodes) used for oracle checks.
std::vector<Instance> small_fixtures();

}  // namespace cascade
