#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cascade/instance_io.hpp"
#include "cascade/oracle.hpp"

namespace cascade {

/// No nonsingular exploration design exists for the features.
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RadiusRule {
  theory,     // (4R^2 / (kappa^2 rho)) ((d/2) ln(1+2n/d) + ln(1/delta2))
  practical,  // same bracket with the constant prefactor replaced by radius_scale
};

struct AlgoConfig {
  std::size_t T = 1000;
  std::size_t K = 1;
  std::optional<double> norm_bound;     // default: ceil(||theta*||)
  std::optional<double> p_min_assumed;  // default: smallest true edge probability
  std::optional<double> delta;          // fixed delta1 = delta2; default 1/t^2
  std::size_t m_rand = 0;               // 0 means 2d
  std::size_t n_mc = 200;
  bool oracle_exact = false;
  std::optional<std::uint64_t> tau_override;
  std::optional<double> tau_scale;  // tau = ceil(scale * sqrt(T) ln T), no second branch
  RadiusRule radius_rule = RadiusRule::theory;
  double radius_scale = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double mle_tol = 1e-6;            // gradient tolerance per observation
  bool oracle_knows_theta = false;  // debug: ellipsoid collapses to {theta*}
  std::size_t n_eval = 20000;       // MC samples for f(S_t) when exact is infeasible

  /// Throws std::invalid_argument when T, K, p_min_assumed, alpha or beta are out of range.
  void validate() const;
};

struct ExplorationDesign {
  std::vector<EdgeId> edges;
  double sigma_min = 0.0;
  double lambda_min = 0.0;  // lambda_min(sum x x^T) over the chosen edges
};

/// Greedy column-subset selection: each step adds the edge maximizing the
/// smallest singular value of the chosen feature rows (ties: lowest edge id).
/// Throws AssumptionError when the result is singular beyond 1e-10.
ExplorationDesign select_exploration_edges(const DirectedGraph& graph, const FeatureMap& fm,
                                           std::size_t d);

/// ceil(max(sqrt(T) ln T, 16 R^2 (d + 2 ln T) / (kappa^2 rho^2 lambda_min))),
/// saturating at 2^62.
std::uint64_t exploration_tau(double T, std::size_t d, double R, double kappa, double rho,
                              double lambda_min_o);

/// f* - f / (alpha beta).
double scaled_regret(double f_star, double f_st, double alpha, double beta);

enum class Phase { explore, exploit };

struct RoundLog {
  std::size_t round = 0;  // 1-based
  Phase phase = Phase::explore;
  SeedSet seeds;
  std::size_t spread = 0;
  double f_exp = 0.0;
  double f_exp_se = 0.0;
  double regret = 0.0;
  double rho_star = 0.0;
  double rho_eff = 0.0;
  double lambda_min = 0.0;
  double radius_sq = 0.0;  // NaN until the first ellipsoid
  std::size_t n_obs = 0;
  bool rho_floor_holds = false;  // V_t - (p_min/2) M_t is PSD
  bool mle_converged = false;
  bool mle_at_boundary = false;
  bool mle_retained_previous = false;
  bool guarantee_void = false;  // concentration precondition failed
  bool oracle_degenerate = false;
  std::size_t oracle_candidate = 0;
};

struct GrowthViolation {
  std::size_t super_round = 0;
  double lambda_min = 0.0;
  double bound = 0.0;
};

struct RunResult {
  std::vector<RoundLog> logs;
  std::vector<double> cumulative_regret;
  Vector theta_hat;
  double f_star = 0.0;
  double f_star_se = 0.0;
  SeedSet optimal_seeds;
  std::uint64_t tau = 0;
  std::size_t explore_rounds = 0;
  ExplorationDesign design;
  std::size_t growth_checks = 0;
  std::vector<GrowthViolation> growth_violations;
  nlohmann::json metadata;
};

/// Two-phase run: tau exploration super-rounds (d rounds each, seeding the
/// source of one design edge), then T - d tau rounds of pair-oracle seeding
/// with an MLE refit after every cascade. Deterministic in (config, seed,
/// replication). If d tau >= T every round explores.
RunResult run_tpnodeim(const Instance& inst, const AlgoConfig& config, std::uint64_t seed,
                       std::uint64_t replication = 0);

std::string to_string(Phase phase);
std::string to_string(RadiusRule rule);
RadiusRule parse_radius_rule(const std::string& s);

}  // namespace cascade
