#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cascade/generators.hpp"
#include "cascade/oracle.hpp"

using namespace cascade;

namespace {

constexpr double kOneMinusInvE = 0.63212055882855767840;

SeedSet sorted(SeedSet s) {
  std::sort(s.begin(), s.end());
  return s;
}

ConfidenceEllipsoid ball_ellipsoid(const Vector& center, double scale, double radius_sq) {
  ConfidenceEllipsoid ell;
  ell.center = center;
  ell.shape = scale * Matrix::Identity(center.size(), center.size());
  ell.radius_sq = radius_sq;
  return ell;
}

}  // namespace

TEST_CASE("greedy on the diamond") {
  const Instance fig1 = fig1_instance();
  const ExactSpread exact(SpreadModel(fig1.graph, fig1.features, fig1.theta));
  const GreedyResult one = greedy_im(exact, 1, 0);
  CHECK(one.seeds == SeedSet{0});
  CHECK(one.value.mean == doctest::Approx(3.72).epsilon(1e-12));

  const GreedyResult all = greedy_im(exact, 4, 0);
  CHECK(sorted(all.seeds) == SeedSet{0, 1, 2, 3});
  CHECK(all.value.mean == doctest::Approx(4.0));

  CHECK(greedy_im(fig1.graph, fig1.features, fig1.theta, 1, 500, 3) == SeedSet{0});

  CHECK_THROWS_AS(greedy_im(exact, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(greedy_im(exact, 5, 0), std::invalid_argument);
}

TEST_CASE("greedy breaks ties toward the smallest index") {
  // Directed 4-cycle with certain edges: every single seed reaches every node.
  const DirectedGraph cycle(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  const SpreadModel model(cycle, std::vector<double>(4, 1.0));
  CHECK(greedy_im(ExactSpread(model), 1, 0).seeds == SeedSet{0});
  CHECK(greedy_im(MonteCarloSpread(model, 50), 1, 9).seeds == SeedSet{0});
}

TEST_CASE("greedy is deterministic and monotone in K") {
  const Instance inst = small_fixtures()[3];
  const SpreadModel model(inst.graph, inst.features, inst.theta);
  const MonteCarloSpread mc(model, 2000);
  CHECK(greedy_im(mc, 3, 5).seeds == greedy_im(mc, 3, 5).seeds);

  const ExactSpread exact(model);
  double prev = 0.0;
  double prev_mc = 0.0, prev_se = 0.0;
  for (std::size_t k = 1; k <= inst.graph.node_count(); ++k) {
    const double v = greedy_im(exact, k, 0).value.mean;
    CHECK(v >= prev - 1e-12);
    prev = v;
    const GreedyResult g = greedy_im(mc, k, 5);
    CHECK(g.value.mean >= prev_mc - 2.0 * (g.value.se + prev_se));
    prev_mc = g.value.mean;
    prev_se = g.value.se;
  }
}

TEST_CASE("lazy greedy matches plain greedy under exact evaluation") {
  for (const Instance& inst : small_fixtures()) {
    const ExactSpread exact(SpreadModel(inst.graph, inst.features, inst.theta));
    for (std::size_t k = 1; k <= 3; ++k) {
      const GreedyResult plain = greedy_im(exact, k, 0);
      const GreedyResult lazy = greedy_im(exact, k, 0, GreedyOptions{true});
      CHECK(lazy.value.mean == doctest::Approx(plain.value.mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact greedy achieves the submodular approximation ratio on small fixtures") {
  for (const Instance& inst : small_fixtures()) {
    REQUIRE(inst.graph.node_count() <= 8);
    const SpreadModel model(inst.graph, inst.features, inst.theta);
    for (std::size_t k = 1; k <= 3; ++k) {
      const double greedy = greedy_im(ExactSpread(model), k, 0).value.mean;
      const ExhaustiveResult opt = exhaustive_opt(model, k);
      CHECK(greedy >= kOneMinusInvE * opt.value - 1e-12);
      CHECK(greedy <= opt.value + 1e-12);
    }
  }
}

TEST_CASE("exhaustive search examples") {
  const Instance fig1 = fig1_instance();
  const ExhaustiveResult one = exhaustive_opt(fig1.graph, fig1.features, fig1.theta, 1);
  CHECK(one.seeds == SeedSet{0});
  CHECK(one.value == doctest::Approx(3.72).epsilon(1e-12));
  const ExhaustiveResult all = exhaustive_opt(fig1.graph, fig1.features, fig1.theta, 4);
  CHECK(sorted(all.seeds) == SeedSet{0, 1, 2, 3});
  CHECK(all.value == doctest::Approx(4.0));

  const DirectedGraph empty(6, {});
  const SpreadModel none(empty, std::vector<double>{});
  const ExhaustiveResult three = exhaustive_opt(none, 3);
  CHECK(three.seeds.size() == 3);
  CHECK(three.value == 3.0);

  const DirectedGraph wide(30, {});
  CHECK_THROWS_AS(exhaustive_opt(SpreadModel(wide, std::vector<double>{}), 5), std::length_error);
}

TEST_CASE("pair oracle stays inside the ellipsoid") {
  const Instance fig1 = fig1_instance();
  Vector center = fig1.theta;
  center(2) += 0.1;
  center(3) -= 0.05;
  const ConfidenceEllipsoid ell = ball_ellipsoid(center, 50.0, 2.0);
  REQUIRE(ellipsoid_contains(ell, fig1.theta));

  PairOracleOptions opts;
  opts.K = 1;
  opts.n_mc = 2000;
  opts.norm_bound = center.norm() + 0.05;
  const OraclePair pair = pair_oracle(fig1.graph, fig1.features, ell, opts, 77);
  CHECK_FALSE(pair.degenerate);
  CHECK(pair.candidates.size() == 1 + 2 * 4 + 2 * 4);
  for (const auto& c : pair.candidates) {
    CHECK(ellipsoid_contains(ell, c.theta));
    CHECK(c.theta.norm() <= opts.norm_bound + 1e-9);
    CHECK(c.seeds.size() == 1);
  }
  CHECK(ellipsoid_contains(ell, pair.theta));
  CHECK(pair.seeds.size() <= opts.K);
  CHECK(pair.value.mean >= pair.candidates[0].value.mean - 2.0 * pair.candidates[0].value.se);
  CHECK(pair.value.mean >= kOneMinusInvE * 3.72 - 3.0 * pair.value.se);
  CHECK(pair.seeds == SeedSet{0});

  const OraclePair again = pair_oracle(fig1.graph, fig1.features, ell, opts, 77);
  CHECK(again.seeds == pair.seeds);
  CHECK(again.value.mean == pair.value.mean);
}

TEST_CASE("pair oracle with a zero radius reduces to greedy at the center") {
  const Instance fig1 = fig1_instance();
  const ConfidenceEllipsoid ell = ball_ellipsoid(fig1.theta, 10.0, 0.0);
  PairOracleOptions opts;
  opts.exact = true;
  const OraclePair pair = pair_oracle(fig1.graph, fig1.features, ell, opts, 1);
  CHECK(pair.candidates.size() == 1);
  CHECK((pair.theta - fig1.theta).norm() == 0.0);
  CHECK(pair.seeds == greedy_im(ExactSpread(SpreadModel(fig1.graph, fig1.features, fig1.theta)), 1, 0).seeds);
  CHECK(pair.value.mean == doctest::Approx(3.72).epsilon(1e-12));
}

TEST_CASE("pair oracle falls back to the center on a degenerate shape") {
  const Instance fig1 = fig1_instance();
  ConfidenceEllipsoid ell = ball_ellipsoid(fig1.theta, 10.0, 1.0);
  ell.shape(3, 3) = 0.0;
  PairOracleOptions opts;
  opts.exact = true;
  const OraclePair singular = pair_oracle(fig1.graph, fig1.features, ell, opts, 1);
  CHECK(singular.degenerate);
  CHECK(singular.candidates.size() == 1);

  ConfidenceEllipsoid unbounded = ball_ellipsoid(fig1.theta, 10.0, INFINITY);
  const OraclePair inf = pair_oracle(fig1.graph, fig1.features, unbounded, opts, 1);
  CHECK(inf.degenerate);
  CHECK(inf.candidates.size() == 1);
}

TEST_CASE("the edge-wise dominant parameter wins") {
  const Instance chain = chain_instance(5, 0.3);
  const Vector lo = chain.theta;
  const Vector hi = 1.8 * chain.theta;
  PairOracleOptions opts;
  opts.K = 1;
  opts.exact = true;
  for (bool hi_first : {true, false}) {
    std::vector<OracleCandidate> cands;
    cands.push_back({hi_first ? hi : lo, "a", {}, {}});
    cands.push_back({hi_first ? lo : hi, "b", {}, {}});
    const OraclePair best = best_candidate(chain.graph, chain.features, cands, opts, 3);
    CHECK((best.theta - hi).norm() == 0.0);
    CHECK(best.candidate_index == (hi_first ? 0U : 1U));
  }
}

TEST_CASE("candidate table dump") {
  const Instance fig1 = fig1_instance();
  const ConfidenceEllipsoid ell = ball_ellipsoid(fig1.theta, 50.0, 1.0);
  PairOracleOptions opts;
  opts.exact = true;
  opts.m_rand = 3;
  const OraclePair pair = pair_oracle(fig1.graph, fig1.features, ell, opts, 5);
  std::ostringstream out;
  write_candidate_table_csv(out, pair);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("index,origin,seed_set,value,se", 0) == 0);
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == pair.candidates.size());
  CHECK(rows == 1 + 8 + 3);
  const std::vector<NodeId> s{0, 2, 3};
  CHECK(format_seed_set(s) == "0;2;3");
}
