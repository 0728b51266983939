#include "cascade/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cascade/rng.hpp"

namespace cascade {

void AlgoConfig::validate() const {
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (p_min_assumed && !(*p_min_assumed > 0.0 && *p_min_assumed < 1.0))
    throw std::invalid_argument("p_min_assumed must lie in (0,1)");
  if (norm_bound && !(*norm_bound > 0.0)) throw std::invalid_argument("norm_bound must be > 0");
  if (delta && !(*delta > 0.0 && *delta < 1.0))
    throw std::invalid_argument("delta must lie in (0,1)");
  if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("alpha and beta must lie in (0,1]");
  if (n_mc < 1 || n_eval < 1) throw std::invalid_argument("sample counts must be >= 1");
  if (tau_scale && !(*tau_scale > 0.0)) throw std::invalid_argument("tau_scale must be > 0");
  if (!(radius_scale > 0.0)) throw std::invalid_argument("radius_scale must be > 0");
}

ExplorationDesign select_exploration_edges(const DirectedGraph& graph, const FeatureMap& fm,
                                           std::size_t d) {
  const std::size_t m = graph.edge_count();
  if (d == 0 || d > m || d > fm.dimension())
    throw std::invalid_argument("select_exploration_edges: need 1 <= d <= min(|E|, dim)");

  ExplorationDesign design;
  std::vector<char> used(m, 0);
  Matrix rows(0, static_cast<Eigen::Index>(fm.dimension()));
  for (std::size_t step = 0; step < d; ++step) {
    double best = -1.0;
    EdgeId best_edge = 0;
    for (EdgeId e = 0; e < m; ++e) {
      if (used[e]) continue;
      Matrix trial(rows.rows() + 1, rows.cols());
      trial.topRows(rows.rows()) = rows;
      trial.row(rows.rows()) = fm.feature(e).transpose();
      const double lam = std::max(0.0, min_eigenvalue(trial * trial.transpose()));
      const double sigma = std::sqrt(lam);
      if (sigma > best + 1e-12 * std::max(1.0, best)) {
        best = sigma;
        best_edge = e;
      }
    }
    used[best_edge] = 1;
    design.edges.push_back(best_edge);
    rows.conservativeResize(rows.rows() + 1, Eigen::NoChange);
    rows.row(rows.rows() - 1) = fm.feature(best_edge).transpose();
  }
  design.sigma_min = std::sqrt(std::max(0.0, min_eigenvalue(rows * rows.transpose())));
  design.lambda_min = min_eigenvalue(rows.transpose() * rows);
  if (design.lambda_min <= 1e-10)
    throw AssumptionError("no exploration design with a nonsingular feature matrix (lambda_min = " +
                          std::to_string(design.lambda_min) + ")");
  return design;
}

std::uint64_t exploration_tau(double T, std::size_t d, double R, double kappa, double rho,
                              double lambda_min_o) {
  constexpr double cap = 4.611686018427388e18;  // 2^62
  const double lnT = std::log(T);
  const double first = std::sqrt(T) * lnT;
  const double second = 16.0 * R * R * (static_cast<double>(d) + 2.0 * lnT) /
                        (kappa * kappa * rho * rho * lambda_min_o);
  const double tau = std::ceil(std::max(first, second));
  if (!(tau < cap)) return static_cast<std::uint64_t>(cap);
  return static_cast<std::uint64_t>(std::max(0.0, tau));
}

double scaled_regret(double f_star, double f_st, double alpha, double beta) {
  return f_star - f_st / (alpha * beta);
}

std::string to_string(Phase phase) { return phase == Phase::explore ? "explore" : "exploit"; }

std::string to_string(RadiusRule rule) {
  return rule == RadiusRule::theory ? "theory" : "practical";
}

RadiusRule parse_radius_rule(const std::string& s) {
  if (s == "theory") return RadiusRule::theory;
  if (s == "practical") return RadiusRule::practical;
  throw std::invalid_argument("unknown radius rule '" + s + "'");
}

namespace {

std::uint64_t tau_for(const AlgoConfig& cfg, std::size_t d, double R, double kappa, double rho,
                      double lambda_min_o) {
  if (cfg.tau_override) return *cfg.tau_override;
  const double T = static_cast<double>(cfg.T);
  if (cfg.tau_scale)
    return static_cast<std::uint64_t>(std::ceil(*cfg.tau_scale * std::sqrt(T) * std::log(T)));
  return exploration_tau(T, d, R, kappa, rho, lambda_min_o);
}

class ExpectedSpread {
 public:
  ExpectedSpread(const SpreadModel& model, std::size_t n_eval, std::uint64_t seed)
      : model_(model), n_eval_(n_eval), seed_(seed),
        exact_(model.graph().edge_count() <= kExactInfluenceMaxEdges) {}

  SpreadEstimate operator()(SeedSet seeds) {
    std::sort(seeds.begin(), seeds.end());
    auto it = cache_.find(seeds);
    if (it != cache_.end()) return it->second;
    SpreadEstimate est = exact_ ? SpreadEstimate{exact_influence(model_, seeds), 0.0, 0}
                                : mc_influence(model_, seeds, n_eval_, seed_);
    cache_.emplace(std::move(seeds), est);
    return est;
  }
  bool exact() const { return exact_; }

 private:
  const SpreadModel& model_;
  std::size_t n_eval_;
  std::uint64_t seed_;
  bool exact_;
  std::map<SeedSet, SpreadEstimate> cache_;
};

}  // namespace

RunResult run_tpnodeim(const Instance& inst, const AlgoConfig& cfg, std::uint64_t seed,
                       std::uint64_t replication) {
  cfg.validate();
  const DirectedGraph& graph = inst.graph;
  const FeatureMap& fm = inst.features;
  if (cfg.K > graph.node_count()) throw std::invalid_argument("K exceeds the node count");

  const InstanceReport report = validate_instance(graph, fm, inst.theta);
  const std::size_t d = fm.dimension();
  nlohmann::json notes = nlohmann::json::array();

  double p_min = cfg.p_min_assumed.value_or(report.p_min);
  if (!cfg.p_min_assumed && p_min >= 1.0) {
    p_min = 0.999;
    notes.push_back("true p_min is 1; p_min_assumed clamped to 0.999");
  }
  const double R = 1.0 / p_min;
  const double S = cfg.norm_bound.value_or(std::ceil(inst.theta.norm()));
  const double kappa = kappa_from_bound(S);
  const double rho_floor = 0.5 * p_min;

  RunResult out;
  out.design = select_exploration_edges(graph, fm, d);
  out.tau = tau_for(cfg, d, R, kappa, rho_floor, out.design.lambda_min);
  const double planned = static_cast<double>(out.tau) * static_cast<double>(d);
  out.explore_rounds = planned >= static_cast<double>(cfg.T)
                           ? cfg.T
                           : static_cast<std::size_t>(out.tau) * d;
  if (planned > static_cast<double>(cfg.T)) notes.push_back("exploration truncated at T rounds");

  const SpreadModel truth(graph, fm, inst.theta);
  ExpectedSpread expected(truth, cfg.n_eval, derive_seed(seed, {0xE7A1, replication}));
  try {
    const ExhaustiveResult best = exhaustive_opt(truth, cfg.K);
    out.f_star = best.value;
    out.optimal_seeds = best.seeds;
  } catch (const std::length_error&) {
    const GreedyResult g = greedy_im(MonteCarloSpread(truth, cfg.n_eval), cfg.K,
                                     derive_seed(seed, {0xF57A, replication}));
    const SpreadEstimate est = expected(g.seeds);
    out.f_star = est.mean;
    out.f_star_se = est.se;
    out.optimal_seeds = g.seeds;
    notes.push_back("f* from greedy + Monte Carlo (exhaustive search infeasible)");
  }

  MleOptions mle_opts;
  mle_opts.tol = cfg.mle_tol;
  mle_opts.norm_bound = S;

  PairOracleOptions oracle_opts;
  oracle_opts.K = cfg.K;
  oracle_opts.m_rand = cfg.m_rand;
  oracle_opts.n_mc = cfg.n_mc;
  oracle_opts.norm_bound = S;
  oracle_opts.exact = cfg.oracle_exact;

  ObservationSet obs(d);
  SuffStats stats(d);
  Vector theta_hat = fm.tabular() ? tabular_init(fm) : Vector::Zero(static_cast<Eigen::Index>(d));
  bool have_fit = false;
  std::optional<ConfidenceEllipsoid> ell;

  auto refresh_ellipsoid = [&](std::size_t t) {
    const double tt = static_cast<double>(std::max<std::size_t>(t, 2));
    const double delta = cfg.delta.value_or(1.0 / (tt * tt));
    ConfidenceEllipsoid e =
        build_ellipsoid(stats, theta_hat, {kappa, R, delta, delta, rho_floor});
    if (cfg.radius_rule == RadiusRule::practical && e.rho_eff > 0.0) {
      const double dd = static_cast<double>(d);
      e.radius_sq = cfg.radius_scale * (0.5 * dd * std::log1p(2.0 * static_cast<double>(stats.n) / dd) -
                                        std::log(delta));
    }
    ell = std::move(e);
  };

  const double pd_tol = 1e-9;
  out.logs.reserve(cfg.T);
  out.cumulative_regret.reserve(cfg.T);
  double cumulative = 0.0;
  for (std::size_t t = 1; t <= cfg.T; ++t) {
    RoundLog log;
    log.round = t;
    if (t <= out.explore_rounds) {
      log.phase = Phase::explore;
      const EdgeId e = out.design.edges[(t - 1) % d];
      log.seeds = {graph.edge(e).source};
    } else {
      log.phase = Phase::exploit;
      if (!ell) refresh_ellipsoid(t - 1);
      ConfidenceEllipsoid target = *ell;
      if (cfg.oracle_knows_theta) {
        target.center = inst.theta;
        target.shape = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        target.radius_sq = 0.0;
      }
      const OraclePair pair =
          pair_oracle(graph, fm, target, oracle_opts, derive_seed(seed, {t, replication, 0x0AC1E}));
      log.seeds = pair.seeds;
      log.oracle_degenerate = pair.degenerate;
      log.oracle_candidate = pair.candidate_index;
    }

    const CascadeTrace trace = simulate_cascade(truth, log.seeds, derive_seed(seed, {t, replication}));
    obs.add(trace);
    for (const auto& o : trace.observations) stats.add(o.feature, o.outcome);
    log.spread = trace.spread;
    log.n_obs = stats.n;

    const SpreadEstimate f = expected(log.seeds);
    log.f_exp = f.mean;
    log.f_exp_se = f.se;
    log.regret = scaled_regret(out.f_star, f.mean, cfg.alpha, cfg.beta);

    log.radius_sq = std::numeric_limits<double>::quiet_NaN();
    if (t >= out.explore_rounds && !obs.empty()) {
      try {
        mle_opts.tol = cfg.mle_tol * static_cast<double>(std::max<std::size_t>(1, obs.size()));
        const MleResult fit = fit_mle(obs, theta_hat, mle_opts);
        log.mle_converged = fit.converged;
        log.mle_at_boundary = fit.at_boundary;
        if (fit.stationary() || !have_fit) {
          theta_hat = fit.theta;
          have_fit = true;
        } else {
          log.mle_retained_previous = true;
        }
      } catch (const std::invalid_argument&) {
        log.mle_retained_previous = true;
      }
      refresh_ellipsoid(t);
      log.rho_star = ell->rho_star;
      log.rho_eff = ell->rho_eff;
      log.radius_sq = ell->radius_sq;
      log.guarantee_void = !ell->precondition_ok;
      log.rho_floor_holds = !ell->singular_m && ell->rho_star >= rho_floor;
    } else {
      const RhoStar r = rho_star(stats);
      log.rho_star = r.value;
      log.rho_eff = std::max(r.value, rho_floor);
      log.rho_floor_holds = !r.singular_m && r.value >= rho_floor;
    }
    log.lambda_min = min_eigenvalue(stats.M);

    if (log.phase == Phase::explore && t % d == 0) {
      const std::size_t k = t / d;
      const double bound = static_cast<double>(k) * out.design.lambda_min;
      ++out.growth_checks;
      if (log.lambda_min < bound - pd_tol * std::max(1.0, stats.M.trace()))
        out.growth_violations.push_back({k, log.lambda_min, bound});
    }

    cumulative += log.regret;
    out.cumulative_regret.push_back(cumulative);
    out.logs.push_back(std::move(log));
  }
  out.theta_hat = theta_hat;

  std::size_t void_rounds = 0;
  std::size_t floor_rounds = 0;
  std::size_t exploit_rounds = 0;
  for (const auto& l : out.logs) {
    if (l.phase != Phase::exploit) continue;
    ++exploit_rounds;
    void_rounds += l.guarantee_void;
    floor_rounds += l.rho_floor_holds;
  }

  auto& m = out.metadata;
  m["instance"] = inst.name;
  m["seed"] = seed;
  m["replication"] = replication;
  m["T"] = cfg.T;
  m["K"] = cfg.K;
  m["dimension"] = d;
  m["tau"] = out.tau;
  m["explore_rounds"] = out.explore_rounds;
  m["exploit_rounds"] = exploit_rounds;
  m["norm_bound"] = S;
  m["theta_norm"] = inst.theta.norm();
  m["p_min_true"] = report.p_min;
  m["p_min_assumed"] = p_min;
  m["R"] = R;
  m["kappa"] = kappa;
  m["rho_floor"] = rho_floor;
  m["design_edges"] = out.design.edges;
  m["design_sigma_min"] = out.design.sigma_min;
  m["design_lambda_min"] = out.design.lambda_min;
  m["f_star"] = out.f_star;
  m["f_star_se"] = out.f_star_se;
  m["optimal_seeds"] = out.optimal_seeds;
  m["expected_spread_exact"] = expected.exact();
  m["delta"] = cfg.delta ? nlohmann::json(*cfg.delta) : nlohmann::json("1/t^2");
  m["radius_rule"] = to_string(cfg.radius_rule);
  m["radius_scale"] = cfg.radius_scale;
  m["n_mc"] = cfg.n_mc;
  m["m_rand"] = cfg.m_rand == 0 ? 2 * d : cfg.m_rand;
  m["oracle_exact"] = cfg.oracle_exact;
  m["oracle_knows_theta"] = cfg.oracle_knows_theta;
  m["alpha"] = cfg.alpha;
  m["beta"] = cfg.beta;
  m["growth_checks"] = out.growth_checks;
  m["growth_violations"] = out.growth_violations.size();
  m["guarantee_void_rounds"] = void_rounds;
  m["rho_floor_rounds"] = floor_rounds;
  m["theta_hat"] = std::vector<double>(theta_hat.data(), theta_hat.data() + theta_hat.size());
  m["cumulative_regret"] = cumulative;
  m["notes"] = notes;
  return out;
}

}  // namespace cascade
