#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cascade/generators.hpp"
#include "cascade/graph.hpp"
#include "cascade/instance_io.hpp"
#include "cascade/rng.hpp"

using namespace cascade;

namespace {

constexpr double kNegLn04 = 0.9162907318741550651835;  // -ln 0.4

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("graph construction rejects malformed edge lists") {
  CHECK_THROWS_AS(DirectedGraph(3, {{0, 0}}), InstanceError);
  CHECK_THROWS_AS(DirectedGraph(3, {{0, 1}, {0, 1}}), InstanceError);
  CHECK_THROWS_AS(DirectedGraph(3, {{0, 3}}), InstanceError);
  const DirectedGraph g(3, {{0, 1}, {2, 1}, {1, 2}});
  CHECK(g.in_degree(1) == 2);
  CHECK(g.in_neighbors(1) == std::vector<NodeId>{0, 2});
  CHECK(g.find_edge(2, 1) == std::optional<EdgeId>(1));
  CHECK_FALSE(g.find_edge(1, 0).has_value());
}

TEST_CASE("tabular features are unit vectors scaled by target in-degree") {
  const Instance fig1 = fig1_instance();
  const FeatureMap fm = build_tabular_features(fig1.graph);
  CHECK(fm.dimension() == 4);
  CHECK(fm.tabular());
  const EdgeId ac = *fig1.graph.find_edge(1, 3);
  CHECK((fm.feature(ac) - vec({0, 0, 0.5, 0})).norm() == 0.0);
  const EdgeId oa = *fig1.graph.find_edge(0, 1);
  CHECK((fm.feature(oa) - vec({1, 0, 0, 0})).norm() == 0.0);

  const DirectedGraph single(2, {{0, 1}});
  CHECK(build_tabular_features(single).feature(0)(0) == 1.0);

  const Instance star = star_instance(3, 0.5);
  const FeatureMap sfm = build_tabular_features(star.graph);
  for (EdgeId e = 0; e < 3; ++e) CHECK(sfm.feature(e)(e) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("link function values and stability") {
  CHECK(link(0.0) == 0.0);
  CHECK(link(kNegLn04) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(link(50.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(link(50.0) <= 1.0);
  CHECK(log_link(1e-300) == doctest::Approx(std::log(1e-300)).epsilon(1e-12));
  CHECK(log_link(50.0) == doctest::Approx(-std::exp(-50.0)).epsilon(1e-10));
  CHECK(std::isfinite(log_link(1e-300)));
  CHECK(inverse_link(0.6) == doctest::Approx(kNegLn04).epsilon(1e-14));
  CHECK(std::isinf(inverse_link(1.0)));
  for (double p : {1e-9, 0.1, 0.5, 0.99}) CHECK(link(inverse_link(p)) == doctest::Approx(p).epsilon(1e-12));
  CHECK(edge_prob(vec({0.5, 0.5}), vec({kNegLn04, kNegLn04})) == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("aggregated probability on the diamond example") {
  const Instance fig1 = fig1_instance();
  const std::vector<NodeId> ab{1, 2};
  const double p = aggregated_prob(fig1.graph, fig1.features, ab, 3, fig1.theta);
  CHECK(std::abs(p - 0.72) <= 1e-12);
  CHECK(std::abs(p - (1.0 - 0.4 * 0.7)) <= 1e-12);

  const std::vector<NodeId> a{1};
  CHECK(aggregated_prob(fig1.graph, fig1.features, a, 3, fig1.theta) == doctest::Approx(0.6).epsilon(1e-12));

  const Instance star = star_instance(3, 0.5);
  const std::vector<NodeId> all{0, 1, 2};
  CHECK(std::abs(aggregated_prob(star.graph, star.features, all, 3, star.theta) - 0.875) <= 1e-12);

  CHECK_THROWS_AS(aggregated_prob(fig1.graph, fig1.features, std::span<const NodeId>{}, 3, fig1.theta),
                  std::invalid_argument);
  const std::vector<NodeId> not_parent{0};
  CHECK_THROWS_AS(aggregated_prob(fig1.graph, fig1.features, not_parent, 3, fig1.theta),
                  std::invalid_argument);
}

TEST_CASE("aggregation equals one minus the product of failures and is monotone") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t parents = 1 + trial % 6;
    const Instance star = star_instance(parents, 0.5);
    std::vector<double> probs(parents);
    for (auto& p : probs) p = 0.01 + 0.98 * rng.uniform();
    const Vector theta = tabular_theta_for(star.graph, probs);
    const auto target = static_cast<NodeId>(parents);
    double prev = 0.0;
    double fail = 1.0;
    std::vector<NodeId> set;
    for (NodeId u = 0; u < parents; ++u) {
      set.push_back(u);
      fail *= 1.0 - probs[u];
      const double agg = aggregated_prob(star.graph, star.features, set, target, theta);
      CHECK(std::abs(agg - (1.0 - fail)) <= 1e-12);
      CHECK(agg >= prev);
      prev = agg;
    }
  }
}

TEST_CASE("instance validation") {
  const Instance fig1 = fig1_instance();
  const InstanceReport r = validate_instance(fig1.graph, fig1.features, fig1.theta);
  CHECK(r.exact_subset_check);
  CHECK(r.max_subset_norm == doctest::Approx(1.0));
  CHECK(r.p_min == doctest::Approx(0.3));
  CHECK(r.R == doctest::Approx(1.0 / 0.3));

  const DirectedGraph one(2, {{0, 1}});
  Matrix x(1, 1);
  x << 1.0;
  const FeatureMap unit(x);
  CHECK(validate_instance(one, unit, vec({1.0})).D == doctest::Approx(1.0));

  // Zero score on an edge.
  Vector zero = fig1.theta;
  zero(2) = 0.0;
  try {
    validate_instance(fig1.graph, fig1.features, zero);
    FAIL("expected InstanceError");
  } catch (const InstanceError& e) {
    CHECK(std::string(e.what()).find("edge") != std::string::npos);
  }

  // Subset norm above one.
  Matrix big(2, 1);
  big << 0.8, 0.8;
  const DirectedGraph two(3, {{0, 2}, {1, 2}});
  try {
    validate_instance(two, FeatureMap(big), vec({1.0}));
    FAIL("expected InstanceError");
  } catch (const InstanceError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("instance JSON round trip and probability input") {
  const Instance fig1 = fig1_instance();
  const Instance back = parse_instance(instance_to_json(fig1));
  CHECK(back.graph.edges() == fig1.graph.edges());
  CHECK((back.theta - fig1.theta).norm() <= 1e-12);
  CHECK((back.features.matrix() - fig1.features.matrix()).norm() == 0.0);

  const Instance file = load_instance(CASCADE_FIXTURE_DIR "/fig1.json");
  CHECK(file.graph.edges() == fig1.graph.edges());
  for (EdgeId e = 0; e < 4; ++e)
    CHECK(edge_prob(file.features.feature(e), file.theta) ==
          doctest::Approx(edge_prob(fig1.features.feature(e), fig1.theta)).epsilon(1e-12));

  const nlohmann::json j = {{"nodes", 2}, {"edges", {{0, 1}}}, {"features", "tabular"},
                            {"probabilities", {1.0}}};
  const Instance sat = parse_instance(j);
  CHECK(sat.theta(0) == kSaturatedScore);
  CHECK(edge_prob(sat.features.feature(0), sat.theta) == 1.0);

  CHECK_THROWS(parse_instance(nlohmann::json{{"nodes", 2}}));
  CHECK_THROWS(parse_instance(nlohmann::json{{"nodes", 2}, {"edges", {{0, 5}}}, {"features", "tabular"},
                                             {"probabilities", {0.5}}}));
}
