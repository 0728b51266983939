#include "cascade/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cascade/rng.hpp"

namespace cascade {

namespace {

double binomial(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    c *= static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// Largest s in [0,1] with ||center + s (target - center)|| <= bound.
Vector pull_into_ball(const Vector& center, const Vector& target, double bound) {
  if (target.norm() <= bound || center.norm() > bound) return center.norm() > bound ? center : target;
  const Vector dir = target - center;
  const double a = dir.squaredNorm();
  const double b = 2.0 * center.dot(dir);
  const double c = center.squaredNorm() - bound * bound;
  const double s = std::clamp((-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a),
                              0.0, 1.0);
  return center + s * dir;
}

// Shrinks toward the center until the roundoff-sensitive membership test holds.
Vector settle_inside(const ConfidenceEllipsoid& ell, Vector theta) {
  for (int i = 0; i < 60 && !ellipsoid_contains(ell, theta); ++i)
    theta = ell.center + (1.0 - 1e-9) * (theta - ell.center);
  return ellipsoid_contains(ell, theta) ? theta : ell.center;
}

}  // namespace

GreedyResult greedy_im(const SpreadEvaluator& eval, std::size_t K, std::uint64_t seed,
                       const GreedyOptions& opts) {
  const std::size_t n = eval.node_count();
  if (K < 1 || K > n)
    throw std::invalid_argument("greedy_im: K must lie in [1, " + std::to_string(n) + "]");

  GreedyResult res;
  std::vector<char> chosen(n, 0);
  SeedSet trial;

  if (!opts.lazy) {
    for (std::size_t step = 0; step < K; ++step) {
      const std::uint64_t crn = derive_seed(seed, {step});
      NodeId best = 0;
      SpreadEstimate best_value{-1.0, 0.0, 0};
      for (NodeId v = 0; v < n; ++v) {
        if (chosen[v]) continue;
        trial = res.seeds;
        trial.push_back(v);
        const SpreadEstimate value = eval.evaluate(trial, crn);
        if (value.mean > best_value.mean) {
          best = v;
          best_value = value;
        }
      }
      chosen[best] = 1;
      res.seeds.push_back(best);
      res.value = best_value;
    }
    return res;
  }

  // CELF: gains from earlier steps upper-bound later ones under submodularity.
  struct Entry {
    double gain;
    NodeId node;
    std::size_t fresh_at;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    return a.gain < b.gain || (a.gain == b.gain && a.node > b.node);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> queue(worse);
  {
    const std::uint64_t crn = derive_seed(seed, {0});
    for (NodeId v = 0; v < n; ++v) {
      const NodeId single[] = {v};
      queue.push({eval.evaluate(single, crn).mean, v, 0});
    }
  }
  SpreadEstimate current{0.0, 0.0, 0};
  for (std::size_t step = 0; step < K; ++step) {
    const std::uint64_t crn = derive_seed(seed, {step});
    const double base = step == 0 ? 0.0 : eval.evaluate(res.seeds, crn).mean;
    while (true) {
      Entry top = queue.top();
      queue.pop();
      if (top.fresh_at == step) {
        res.seeds.push_back(top.node);
        current = eval.evaluate(res.seeds, crn);
        break;
      }
      trial = res.seeds;
      trial.push_back(top.node);
      queue.push({eval.evaluate(trial, crn).mean - base, top.node, step});
    }
  }
  res.value = current;
  return res;
}

SeedSet greedy_im(const DirectedGraph& graph, const FeatureMap& fm, const Vector& theta,
                  std::size_t K, std::size_t n_mc, std::uint64_t seed) {
  return greedy_im(MonteCarloSpread(SpreadModel(graph, fm, theta), n_mc), K, seed).seeds;
}

OraclePair pair_oracle(const DirectedGraph& graph, const FeatureMap& fm,
                       const ConfidenceEllipsoid& ell, const PairOracleOptions& opts,
                       std::uint64_t seed) {
  if (opts.K < 1) throw std::invalid_argument("pair_oracle: K must be >= 1");
  const auto d = ell.center.size();
  if (d == 0 || ell.shape.rows() != d || ell.shape.cols() != d)
    throw std::invalid_argument("pair_oracle: malformed ellipsoid");

  OraclePair out;
  out.candidates.push_back({ell.center, "center", {}, {}});

  const SymmetricEigen eig = jacobi_eigen(ell.shape);
  const double scale = std::max(1.0, ell.shape.trace());
  out.degenerate = !std::isfinite(ell.radius_sq) || eig.values(0) <= 1e-12 * scale;

  if (!out.degenerate && ell.radius_sq > 0.0) {
    const double c = std::sqrt(ell.radius_sq);
    for (Eigen::Index j = 0; j < d; ++j) {
      const Vector axis = (c / std::sqrt(eig.values(j))) * eig.vectors.col(j);
      for (int sign : {+1, -1}) {
        Vector theta = pull_into_ball(ell.center, ell.center + sign * axis, opts.norm_bound);
        out.candidates.push_back({settle_inside(ell, std::move(theta)),
                                  (sign > 0 ? "axis+" : "axis-") + std::to_string(j),
                                  {},
                                  {}});
      }
    }
    const std::size_t m_rand = opts.m_rand == 0 ? 2 * static_cast<std::size_t>(d) : opts.m_rand;
    Vector inv_sqrt = eig.values.cwiseSqrt().cwiseInverse();
    const Matrix whitening = eig.vectors * inv_sqrt.asDiagonal() * eig.vectors.transpose();
    Rng rng(derive_seed(seed, {0xB0DA}));
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < m_rand; ++i) {
      Vector w(d);
      for (Eigen::Index k = 0; k < d; ++k) w(k) = normal(rng);
      w /= std::max(w.norm(), 1e-300);
      Vector theta = pull_into_ball(ell.center, ell.center + c * (whitening * w), opts.norm_bound);
      out.candidates.push_back({settle_inside(ell, std::move(theta)), "boundary", {}, {}});
    }
  }

  OraclePair best = best_candidate(graph, fm, std::move(out.candidates), opts, seed);
  best.degenerate = out.degenerate;
  return best;
}

OraclePair best_candidate(const DirectedGraph& graph, const FeatureMap& fm,
                          std::vector<OracleCandidate> candidates, const PairOracleOptions& opts,
                          std::uint64_t seed) {
  if (candidates.empty()) throw std::invalid_argument("best_candidate: no candidates");
  if (opts.K < 1) throw std::invalid_argument("best_candidate: K must be >= 1");
  OraclePair out;
  out.candidates = std::move(candidates);
  const std::uint64_t greedy_seed = derive_seed(seed, {0x6EED});
  for (std::size_t i = 0; i < out.candidates.size(); ++i) {
    auto& cand = out.candidates[i];
    SpreadModel model(graph, fm, cand.theta);
    GreedyResult g = opts.exact ? greedy_im(ExactSpread(model), opts.K, greedy_seed)
                                : greedy_im(MonteCarloSpread(model, opts.n_mc), opts.K,
                                            greedy_seed);
    cand.seeds = std::move(g.seeds);
    cand.value = g.value;
    if (i == 0 || cand.value.mean > out.value.mean) {
      out.candidate_index = i;
      out.value = cand.value;
    }
  }
  out.seeds = out.candidates[out.candidate_index].seeds;
  out.theta = out.candidates[out.candidate_index].theta;
  return out;
}

ExhaustiveResult exhaustive_opt(const SpreadModel& model, std::size_t K) {
  const std::size_t n = model.graph().node_count();
  K = std::min(K, n);
  if (binomial(n, K) > kExhaustiveMaxSets)
    throw std::length_error("exhaustive_opt: C(" + std::to_string(n) + "," + std::to_string(K) +
                            ") exceeds the enumeration guard");
  if (K == 0) throw std::invalid_argument("exhaustive_opt: K must be >= 1");
  // Spread is monotone in the seed set, so sets of size exactly K attain the
  // optimum over sizes <= K.
  ExhaustiveResult best;
  std::vector<NodeId> set(K);
  for (std::size_t i = 0; i < K; ++i) set[i] = static_cast<NodeId>(i);
  while (true) {
    const double value = exact_influence(model, set);
    if (value > best.value + 1e-12) {
      best.value = value;
      best.seeds = set;
    }
    // Next combination in lexicographic order.
    std::size_t i = K;
    while (i > 0 && set[i - 1] == n - K + i - 1) --i;
    if (i == 0) break;
    ++set[i - 1];
    for (std::size_t j = i; j < K; ++j) set[j] = set[j - 1] + 1;
  }
  return best;
}

ExhaustiveResult exhaustive_opt(const DirectedGraph& graph, const FeatureMap& fm,
                                const Vector& theta, std::size_t K) {
  return exhaustive_opt(SpreadModel(graph, fm, theta), K);
}

std::string format_seed_set(std::span<const NodeId> seeds) {
  std::ostringstream os;
  for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? ";" : "") << seeds[i];
  return os.str();
}

void write_candidate_table_csv(std::ostream& out, const OraclePair& pair) {
  out << "index,origin,seed_set,value,se,theta\n" << std::setprecision(17);
  for (std::size_t i = 0; i < pair.candidates.size(); ++i) {
    const auto& c = pair.candidates[i];
    out << i << ',' << c.origin << ',' << format_seed_set(c.seeds) << ',' << c.value.mean << ','
        << c.value.se << ',';
    for (Eigen::Index k = 0; k < c.theta.size(); ++k) out << (k ? ";" : "") << c.theta(k);
    out << '\n';
  }
}

}  // namespace cascade
