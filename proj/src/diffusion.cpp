#include "cascade/diffusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cascade/rng.hpp"

namespace cascade {

namespace {

constexpr std::uint32_t kInactive = 0xFFFFFFFFU;
constexpr std::uint64_t kEdgeCoinKey = 0xFFFFFFFFULL;

// Uniform draw keyed by (cascade, a, b); identical across seed sets and
// parameters, which gives common random numbers for free.
inline double keyed_uniform(std::uint64_t cascade_seed, std::uint64_t a, std::uint64_t b) {
  return to_unit(mix64(cascade_seed ^ mix64((a << 32) | b)));
}

struct Workspace {
  std::vector<std::uint32_t> step_of;
  std::vector<double> pending;
  std::vector<std::uint8_t> touched_flag;
  std::vector<std::uint8_t> edge_hit;
  std::vector<NodeId> frontier, next, touched;

  void reset(std::size_t n) {
    step_of.assign(n, kInactive);
    pending.assign(n, 0.0);
    touched_flag.assign(n, 0);
    edge_hit.assign(n, 0);
    frontier.clear();
    next.clear();
    touched.clear();
  }
};

// Runs one cascade; `observe(step, target, outcome)` fires once per attempted
// (target, step) in step-then-target order. Returns the spread.
template <class Observe>
std::size_t run_cascade(const SpreadModel& model, std::span<const NodeId> seeds,
                        std::uint64_t cascade_seed, CascadeMode mode, Workspace& ws,
                        Observe&& observe) {
  const DirectedGraph& g = model.graph();
  const auto scores = model.scores();
  ws.reset(g.node_count());
  std::size_t spread = 0;
  for (NodeId s : seeds) {
    if (s >= g.node_count())
      throw std::out_of_range("seed node " + std::to_string(s) + " outside graph");
    if (ws.step_of[s] == kInactive) {
      ws.step_of[s] = 0;
      ws.frontier.push_back(s);
      ++spread;
    }
  }

  for (std::uint32_t step = 1; !ws.frontier.empty(); ++step) {
    ws.touched.clear();
    for (NodeId u : ws.frontier) {
      for (EdgeId e : g.out_edges(u)) {
        const NodeId v = g.edge(e).target;
        if (ws.step_of[v] != kInactive) continue;
        if (!ws.touched_flag[v]) {
          ws.touched_flag[v] = 1;
          ws.touched.push_back(v);
        }
        ws.pending[v] += scores[e];
        if (mode == CascadeMode::per_edge_debug &&
            keyed_uniform(cascade_seed, e, kEdgeCoinKey) < link(scores[e]))
          ws.edge_hit[v] = 1;
      }
    }
    std::sort(ws.touched.begin(), ws.touched.end());
    ws.next.clear();
    for (NodeId v : ws.touched) {
      const bool success = mode == CascadeMode::hyper_edge
                               ? keyed_uniform(cascade_seed, v, step) < link(ws.pending[v])
                               : ws.edge_hit[v] != 0;
      observe(step, v, success);
      if (success) {
        ws.step_of[v] = step;
        ws.next.push_back(v);
        ++spread;
      }
      ws.pending[v] = 0.0;
      ws.touched_flag[v] = 0;
      ws.edge_hit[v] = 0;
    }
    ws.frontier.swap(ws.next);
  }
  return spread;
}

Workspace& thread_workspace() {
  thread_local Workspace ws;
  return ws;
}

}  // namespace

SpreadModel::SpreadModel(const DirectedGraph& graph, const FeatureMap& features,
                         const Vector& theta)
    : graph_(&graph), features_(&features), scores_(edge_scores(features, theta)) {
  if (features.edge_count() != graph.edge_count())
    throw std::invalid_argument("feature rows do not match edge count");
  for (double& z : scores_) z = std::max(z, 0.0);
}

SpreadModel::SpreadModel(const DirectedGraph& graph, const std::vector<double>& probabilities)
    : graph_(&graph) {
  if (probabilities.size() != graph.edge_count())
    throw std::invalid_argument("need one probability per edge");
  scores_.reserve(probabilities.size());
  for (double p : probabilities) scores_.push_back(std::max(inverse_link(p), 0.0));
}

CascadeTrace simulate_cascade(const SpreadModel& model, std::span<const NodeId> seeds,
                              std::uint64_t cascade_seed, CascadeMode mode) {
  Workspace& ws = thread_workspace();
  const DirectedGraph& g = model.graph();
  CascadeTrace trace;
  trace.spread = run_cascade(model, seeds, cascade_seed, mode, ws,
                             [&](std::uint32_t step, NodeId v, bool y) {
                               HyperEdgeObservation obs;
                               obs.step = step;
                               obs.target = v;
                               obs.outcome = y;
                               for (EdgeId e : g.in_edges(v)) {
                                 const NodeId u = g.edge(e).source;
                                 if (ws.step_of[u] == step - 1) obs.parents.push_back(u);
                               }
                               std::sort(obs.parents.begin(), obs.parents.end());
                               if (model.features())
                                 obs.feature = model.features()->sum_features(g, obs.parents, v);
                               trace.observations.push_back(std::move(obs));
                             });
  trace.activated_at.resize(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (ws.step_of[v] != kInactive) trace.activated_at[v] = ws.step_of[v];
  return trace;
}

CascadeTrace simulate_cascade(const DirectedGraph& graph, const FeatureMap& fm,
                              const Vector& theta, std::span<const NodeId> seeds,
                              std::uint64_t cascade_seed, CascadeMode mode) {
  return simulate_cascade(SpreadModel(graph, fm, theta), seeds, cascade_seed, mode);
}

std::size_t simulate_spread(const SpreadModel& model, std::span<const NodeId> seeds,
                            std::uint64_t cascade_seed) {
  return run_cascade(model, seeds, cascade_seed, CascadeMode::hyper_edge, thread_workspace(),
                     [](std::uint32_t, NodeId, bool) {});
}

SpreadEstimate mc_influence(const SpreadModel& model, std::span<const NodeId> seeds,
                            std::size_t n_samples, std::uint64_t base_seed) {
  if (n_samples == 0) throw std::invalid_argument("mc_influence: n_samples must be >= 1");
  SpreadEstimate est;
  est.samples = n_samples;
  if (seeds.empty()) return est;
  // Spreads are small integers, so the running sums are exact in double.
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto s = static_cast<double>(simulate_spread(model, seeds, derive_seed(base_seed, {i})));
    sum += s;
    sum_sq += s * s;
  }
  const double n = static_cast<double>(n_samples);
  est.mean = sum / n;
  if (n_samples > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.se = std::sqrt(var / n);
  }
  return est;
}

double exact_influence(const SpreadModel& model, std::span<const NodeId> seeds) {
  const DirectedGraph& g = model.graph();
  if (g.edge_count() > kExactInfluenceMaxEdges)
    throw std::length_error("exact_influence: " + std::to_string(g.edge_count()) +
                            " edges exceeds the enumeration guard of " +
                            std::to_string(kExactInfluenceMaxEdges));
  const std::size_t n = g.node_count();
  std::vector<std::uint8_t> is_seed(n, 0);
  std::size_t seed_count = 0;
  for (NodeId s : seeds) {
    if (s >= n) throw std::out_of_range("seed node " + std::to_string(s) + " outside graph");
    if (!is_seed[s]) {
      is_seed[s] = 1;
      ++seed_count;
    }
  }
  if (seed_count == 0) return 0.0;

  // Only edges from S-reachable nodes into non-seeds can change the outcome;
  // the others marginalize out.
  std::vector<std::uint8_t> reach(n, 0);
  std::vector<NodeId> stack;
  for (NodeId v = 0; v < n; ++v)
    if (is_seed[v]) {
      reach[v] = 1;
      stack.push_back(v);
    }
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (EdgeId e : g.out_edges(u)) {
      const NodeId v = g.edge(e).target;
      if (!reach[v]) {
        reach[v] = 1;
        stack.push_back(v);
      }
    }
  }
  std::vector<int> local(n, -1);  // non-seed reachable node -> bit index
  int bits = 0;
  for (NodeId v = 0; v < n; ++v)
    if (reach[v] && !is_seed[v]) local[v] = bits++;

  struct LiveEdge {
    int source_bit;  // -1 for a seed source
    std::uint32_t target_mask;
    double p;
  };
  std::vector<LiveEdge> rel;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto [u, v] = g.edge(e);
    if (!reach[u] || is_seed[v]) continue;
    rel.push_back({is_seed[u] ? -1 : local[u], std::uint32_t{1} << local[v],
                   model.edge_probability(e)});
  }

  const std::size_t m = rel.size();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    double prob = 1.0;
    for (std::size_t i = 0; i < m && prob > 0.0; ++i)
      prob *= (mask >> i & 1U) ? rel[i].p : 1.0 - rel[i].p;
    if (prob == 0.0) continue;
    std::uint32_t reached = 0;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < m; ++i) {
        if (!(mask >> i & 1U) || (reached & rel[i].target_mask)) continue;
        const int sb = rel[i].source_bit;
        if (sb < 0 || (reached >> sb & 1U)) {
          reached |= rel[i].target_mask;
          changed = true;
        }
      }
    }
    total += prob * static_cast<double>(std::popcount(reached));
  }
  return static_cast<double>(seed_count) + total;
}

double exact_influence(const DirectedGraph& graph, const FeatureMap& fm, const Vector& theta,
                       std::span<const NodeId> seeds) {
  return exact_influence(SpreadModel(graph, fm, theta), seeds);
}

std::vector<std::vector<RelevantEdgeSet>> relevant_edge_sets(const DirectedGraph& graph,
                                                            std::span<const NodeId> seeds) {
  const std::size_t n = graph.node_count();
  std::vector<std::uint8_t> is_seed(n, 0), forward(n, 0);
  std::vector<NodeId> stack;
  for (NodeId s : seeds) {
    if (s >= n) throw std::out_of_range("seed node " + std::to_string(s) + " outside graph");
    if (!is_seed[s]) {
      is_seed[s] = forward[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (EdgeId e : graph.out_edges(u))
      if (!forward[graph.edge(e).target]) {
        forward[graph.edge(e).target] = 1;
        stack.push_back(graph.edge(e).target);
      }
  }

  std::vector<std::vector<RelevantEdgeSet>> out(n);
  for (NodeId v = 0; v < n; ++v) {
    if (is_seed[v] || !forward[v]) continue;
    std::vector<std::uint8_t> backward(n, 0);
    backward[v] = 1;
    stack.assign(1, v);
    while (!stack.empty()) {
      const NodeId w = stack.back();
      stack.pop_back();
      for (EdgeId e : graph.in_edges(w))
        if (!backward[graph.edge(e).source]) {
          backward[graph.edge(e).source] = 1;
          stack.push_back(graph.edge(e).source);
        }
    }
    for (NodeId u = 0; u < n; ++u) {
      if (is_seed[u] || !forward[u] || !backward[u]) continue;
      std::vector<EdgeId> in;
      for (EdgeId e : graph.in_edges(u))
        if (forward[graph.edge(e).source]) in.push_back(e);
      if (in.size() > 20)
        throw std::length_error("relevant_edge_sets: in-degree above 20 at node " +
                                std::to_string(u));
      for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << in.size()); ++mask) {
        RelevantEdgeSet b{u, {}};
        for (std::size_t i = 0; i < in.size(); ++i)
          if (mask >> i & 1U) b.edges.push_back(in[i]);
        out[v].push_back(std::move(b));
      }
    }
    std::sort(out[v].begin(), out[v].end());
  }
  return out;
}

GsDiagnostic gs_statistic(const SpreadModel& model, std::span<const NodeId> seeds,
                          std::size_t n_cascades, std::uint64_t base_seed) {
  const DirectedGraph& g = model.graph();
  std::map<RelevantEdgeSet, std::size_t> count;
  for (const auto& per_node : relevant_edge_sets(g, seeds))
    for (const auto& b : per_node) ++count[b];

  std::map<RelevantEdgeSet, std::size_t> observed;
  for (std::size_t i = 0; i < n_cascades; ++i) {
    const auto trace = simulate_cascade(model, seeds, derive_seed(base_seed, {i}));
    for (const auto& obs : trace.observations) {
      RelevantEdgeSet b{obs.target, {}};
      for (NodeId u : obs.parents) b.edges.push_back(*g.find_edge(u, obs.target));
      std::sort(b.edges.begin(), b.edges.end());
      if (count.contains(b)) ++observed[b];
    }
  }

  GsDiagnostic diag;
  for (const auto& [b, nb] : count) {
    GsDiagnostic::Row row{b, nb, 0.0};
    if (n_cascades > 0) {
      auto it = observed.find(b);
      row.observed_freq = it == observed.end() ? 0.0
                                               : static_cast<double>(it->second) /
                                                     static_cast<double>(n_cascades);
    }
    diag.g_s += row.observed_freq * static_cast<double>(nb * nb);
    diag.rows.push_back(std::move(row));
  }
  return diag;
}

void write_trace_jsonl(std::ostream& out, const CascadeTrace& trace) {
  for (const auto& obs : trace.observations) {
    nlohmann::json j{{"step", obs.step},
                     {"target", obs.target},
                     {"parents", obs.parents},
                     {"y", obs.outcome ? 1 : 0}};
    out << j.dump() << '\n';
  }
}

}  // namespace cascade
