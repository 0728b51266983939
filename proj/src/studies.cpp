#include "cascade/studies.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "cascade/generators.hpp"
#include "cascade/rng.hpp"
#include "cascade/run_io.hpp"

namespace cascade {

namespace {

const std::vector<std::string> kStudies = {"coverage", "rho", "regret_scaling", "censoring",
                                           "single_run"};

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stdev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Mean with a normal-approximation 95% interval; needs two or more values.
nlohmann::json mean_ci(const std::vector<double>& v) {
  nlohmann::json j;
  j["mean"] = mean(v);
  j["n"] = v.size();
  if (v.size() >= 2) {
    const double half = 1.96 * stdev(v) / std::sqrt(static_cast<double>(v.size()));
    j["ci95"] = {mean(v) - half, mean(v) + half};
  }
  return j;
}

// Wilson score interval for a binomial proportion.
nlohmann::json proportion_ci(std::size_t hits, std::size_t n) {
  nlohmann::json j;
  j["hits"] = hits;
  j["n"] = n;
  if (n == 0) return j;
  const double z = 1.96;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double nn = static_cast<double>(n);
  const double centre = (p + z * z / (2 * nn)) / (1 + z * z / nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / (1 + z * z / nn);
  j["frequency"] = p;
  j["ci95"] = {centre - half, centre + half};
  return j;
}

double threshold(const ExperimentSpec& spec, const char* key, double fallback) {
  return spec.thresholds.value(key, fallback);
}

Instance make_instance(const ExperimentSpec& spec) {
  return generate_graph(spec.instance_kind, spec.instance_params, spec.seed);
}

double norm_bound_for(const AlgoConfig& cfg, const Instance& inst) {
  return cfg.norm_bound.value_or(std::ceil(inst.theta.norm()));
}

double p_min_for(const AlgoConfig& cfg, const InstanceReport& report) {
  return cfg.p_min_assumed.value_or(std::min(report.p_min, 0.999));
}

Vector initial_theta(const Instance& inst, const ObservationSet& obs) {
  return inst.features.tabular() ? tabular_init(inst.features) : ridge_init(obs);
}

MleOptions mle_options(const AlgoConfig& cfg, double S, std::size_t n) {
  MleOptions o;
  o.norm_bound = S;
  o.tol = cfg.mle_tol * static_cast<double>(std::max<std::size_t>(1, n));
  return o;
}

// Collects per-replication errors without aborting the other replications.
class ErrorLog {
 public:
  void add(std::size_t rep, const std::exception& e) {
    std::lock_guard lock(mutex_);
    errors_.emplace_back(rep, e.what());
  }
  void flush_into(StudySummary& s) {
    std::sort(errors_.begin(), errors_.end());
    for (const auto& [rep, what] : errors_)
      s.errors.push_back("replication " + std::to_string(rep) + ": " + what);
  }

 private:
  std::mutex mutex_;
  std::vector<std::pair<std::size_t, std::string>> errors_;
};

StudySummary coverage_study(const ExperimentSpec& spec) {
  StudySummary s;
  const Instance inst = make_instance(spec);
  const InstanceReport report = validate_instance(inst.graph, inst.features, inst.theta);
  const std::size_t d = inst.features.dimension();
  const ExplorationDesign design = select_exploration_edges(inst.graph, inst.features, d);
  const double S = norm_bound_for(spec.algo, inst);
  const double p_min = p_min_for(spec.algo, report);
  const EllipsoidParams params{kappa_from_bound(S), 1.0 / p_min, spec.delta, spec.delta,
                               0.5 * p_min};

  struct Rep {
    bool done = false, covered = false, covered_practical = false, precondition = false,
         stationary = false;
    double radius_sq = 0.0, error = 0.0, mahalanobis = 0.0;
  };
  std::vector<Rep> reps(spec.replications);
  ErrorLog errors;
  parallel_for(spec.replications, spec.jobs, [&](std::size_t r) {
    try {
      const ObservationSet obs =
          exploration_observations(inst, design, spec.cascades, derive_seed(spec.seed, {r}));
      const MleResult fit = fit_mle(obs, initial_theta(inst, obs), mle_options(spec.algo, S, obs.size()));
      const SuffStats stats = suff_stats(obs);
      ConfidenceEllipsoid ell = build_ellipsoid(stats, fit.theta, params);
      Rep rep;
      rep.covered = ellipsoid_contains(ell, inst.theta);
      rep.precondition = ell.precondition_ok;
      rep.radius_sq = ell.radius_sq;
      rep.stationary = fit.stationary();
      rep.error = (fit.theta - inst.theta).norm();
      const Vector diff = inst.theta - fit.theta;
      rep.mahalanobis = diff.dot(stats.V * diff);
      ell.radius_sq = 0.5 * static_cast<double>(d) *
                          std::log1p(2.0 * static_cast<double>(stats.n) / static_cast<double>(d)) -
                      std::log(spec.delta);
      rep.covered_practical = ellipsoid_contains(ell, inst.theta);
      rep.done = true;
      reps[r] = rep;
    } catch (const std::exception& e) {
      errors.add(r, e);
    }
  });
  errors.flush_into(s);

  std::size_t n = 0, covered = 0, practical = 0, pre = 0, stationary = 0;
  std::vector<double> radius, err, maha;
  for (const auto& r : reps) {
    if (!r.done) continue;
    ++n;
    covered += r.covered;
    practical += r.covered_practical;
    pre += r.precondition;
    stationary += r.stationary;
    radius.push_back(r.radius_sq);
    err.push_back(r.error);
    maha.push_back(r.mahalanobis);
  }
  const double target = 1.0 - 2.0 * spec.delta;
  const double min_freq = threshold(spec, "min_frequency", target);
  s.metrics["instance"] = inst.name;
  s.metrics["cascades"] = spec.cascades;
  s.metrics["coverage"] = proportion_ci(covered, n);
  s.metrics["practical_radius_coverage"] = proportion_ci(practical, n);
  s.metrics["nominal_level"] = target;
  s.metrics["precondition_rate"] = n ? static_cast<double>(pre) / static_cast<double>(n) : 0.0;
  s.metrics["mle_stationary_rate"] = n ? static_cast<double>(stationary) / static_cast<double>(n) : 0.0;
  s.metrics["radius_sq"] = mean_ci(radius);
  s.metrics["theta_error"] = mean_ci(err);
  s.metrics["mahalanobis_sq"] = {{"median", quantile(maha, 0.5)}, {"q95", quantile(maha, 0.95)}};
  s.thresholds["min_frequency"] = min_freq;
  s.passed = s.errors.empty() && n > 0 &&
             static_cast<double>(covered) / static_cast<double>(n) >= min_freq;
  return s;
}

StudySummary rho_study(const ExperimentSpec& spec) {
  StudySummary s;
  const Instance inst = make_instance(spec);
  const InstanceReport report = validate_instance(inst.graph, inst.features, inst.theta);
  const double p_min = p_min_for(spec.algo, report);
  const std::size_t d = inst.features.dimension();

  struct Rep {
    bool done = false;
    double rho_explore_end = 0.0, bound = 0.0;
    std::size_t exploit = 0, floor_ok = 0, violations = 0, checks = 0;
  };
  std::vector<Rep> reps(spec.replications);
  ErrorLog errors;
  parallel_for(spec.replications, spec.jobs, [&](std::size_t r) {
    try {
      const RunResult run = run_tpnodeim(inst, spec.algo, spec.seed, r);
      Rep rep;
      if (run.explore_rounds > 0) {
        const RoundLog& last = run.logs[run.explore_rounds - 1];
        rep.rho_explore_end = last.rho_star;
        rep.bound = concentration_bound(p_min, 0.5, last.lambda_min, last.n_obs, report.D, d);
      }
      for (const auto& l : run.logs) {
        if (l.phase != Phase::exploit) continue;
        ++rep.exploit;
        rep.floor_ok += l.rho_floor_holds;
      }
      rep.violations = run.growth_violations.size();
      rep.checks = run.growth_checks;
      rep.done = true;
      reps[r] = rep;
      if (!spec.out.empty()) write_run(spec.out, "rho_rep" + std::to_string(r), run);
    } catch (const std::exception& e) {
      errors.add(r, e);
    }
  });
  errors.flush_into(s);

  std::size_t exploit = 0, floor_ok = 0, violations = 0, checks = 0, above = 0, n = 0;
  std::vector<double> rho, bound;
  for (const auto& r : reps) {
    if (!r.done) continue;
    ++n;
    exploit += r.exploit;
    floor_ok += r.floor_ok;
    violations += r.violations;
    checks += r.checks;
    above += r.rho_explore_end >= 0.5 * p_min;
    rho.push_back(r.rho_explore_end);
    bound.push_back(r.bound);
  }
  const double min_rate = threshold(spec, "min_floor_rate", 0.95);
  const double rate = exploit ? static_cast<double>(floor_ok) / static_cast<double>(exploit) : 0.0;
  s.metrics["instance"] = inst.name;
  s.metrics["p_min"] = p_min;
  s.metrics["threshold"] = 0.5 * p_min;
  s.metrics["rho_after_exploration"] = {{"mean", mean(rho)}, {"min", quantile(rho, 0.0)},
                                        {"q05", quantile(rho, 0.05)}, {"median", quantile(rho, 0.5)},
                                        {"max", quantile(rho, 1.0)}};
  s.metrics["above_threshold_after_exploration"] = proportion_ci(above, n);
  s.metrics["concentration_bound_mean"] = mean(bound);
  s.metrics["exploit_rounds"] = exploit;
  s.metrics["floor_rate"] = rate;
  s.metrics["growth_checks"] = checks;
  s.metrics["growth_violations"] = violations;
  s.thresholds["min_floor_rate"] = min_rate;
  s.passed = s.errors.empty() && n > 0 && exploit > 0 && rate >= min_rate && violations == 0;
  return s;
}

StudySummary regret_study(const ExperimentSpec& spec) {
  StudySummary s;
  if (spec.T_grid.size() < 2) throw std::invalid_argument("regret_scaling needs at least two T values");
  const Instance inst = make_instance(spec);
  const std::size_t R = spec.replications;
  const std::size_t G = spec.T_grid.size();

  struct Cell {
    bool done = false;
    double cumulative = 0.0, early = 0.0, late = 0.0;
    std::size_t violations = 0, explore = 0;
  };
  std::vector<Cell> cells(G * R);
  ErrorLog errors;
  parallel_for(G * R, spec.jobs, [&](std::size_t idx) {
    const std::size_t g = idx / R, r = idx % R;
    try {
      AlgoConfig cfg = spec.algo;
      cfg.T = spec.T_grid[g];
      const RunResult run = run_tpnodeim(inst, cfg, spec.seed, r);
      Cell c;
      c.cumulative = run.cumulative_regret.back();
      const std::size_t w = std::max<std::size_t>(1, cfg.T / 10);
      for (std::size_t i = 0; i < w; ++i) {
        c.early += run.logs[i].regret / static_cast<double>(w);
        c.late += run.logs[cfg.T - 1 - i].regret / static_cast<double>(w);
      }
      c.violations = run.growth_violations.size();
      c.explore = run.explore_rounds;
      c.done = true;
      cells[idx] = c;
      if (!spec.out.empty())
        write_run(spec.out, "regret_T" + std::to_string(cfg.T) + "_rep" + std::to_string(r), run);
    } catch (const std::exception& e) {
      errors.add(idx, e);
    }
  });
  errors.flush_into(s);

  std::vector<double> log_t, log_regret;
  nlohmann::json rows = nlohmann::json::array();
  double worst_ratio = 0.0;
  std::size_t violations = 0;
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<double> cum, early, late;
    std::size_t explore = 0;
    for (std::size_t r = 0; r < R; ++r) {
      const Cell& c = cells[g * R + r];
      if (!c.done) continue;
      cum.push_back(c.cumulative);
      early.push_back(c.early);
      late.push_back(c.late);
      violations += c.violations;
      explore = c.explore;
    }
    if (cum.empty()) continue;
    const double e = mean(early), l = mean(late);
    const double ratio = e > 0.0 ? l / e : (l > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    worst_ratio = std::max(worst_ratio, ratio);
    const double T = static_cast<double>(spec.T_grid[g]);
    if (mean(cum) > 0.0) {
      log_t.push_back(std::log(T));
      log_regret.push_back(std::log(mean(cum)));
    }
    rows.push_back({{"T", spec.T_grid[g]},
                    {"explore_rounds", explore},
                    {"cumulative_regret", mean_ci(cum)},
                    {"early_mean_regret", e},
                    {"late_mean_regret", l},
                    {"late_early_ratio", ratio}});
  }
  const double slope =
      log_t.size() >= 2 ? fitted_slope(log_t, log_regret) : std::numeric_limits<double>::quiet_NaN();
  const double max_slope = threshold(spec, "max_slope", 0.75);
  const double max_ratio = threshold(spec, "max_late_early_ratio", 0.25);
  s.metrics["instance"] = inst.name;
  s.metrics["grid"] = rows;
  s.metrics["slope"] = slope;
  s.metrics["worst_late_early_ratio"] = worst_ratio;
  s.metrics["growth_violations"] = violations;
  s.thresholds["max_slope"] = max_slope;
  s.thresholds["max_late_early_ratio"] = max_ratio;
  s.passed = s.errors.empty() && std::isfinite(slope) && slope <= max_slope &&
             worst_ratio <= max_ratio;

  if (!spec.out.empty()) {
    std::filesystem::create_directories(spec.out);
    std::ofstream dat(spec.out / "regret_curve.dat");
    dat << "# T mean_cumulative_regret ci_low ci_high\n";
    for (const auto& row : rows) {
      const auto& c = row["cumulative_regret"];
      dat << row["T"].get<std::size_t>() << ' ' << c["mean"].get<double>();
      if (c.contains("ci95")) dat << ' ' << c["ci95"][0].get<double>() << ' ' << c["ci95"][1].get<double>();
      dat << '\n';
    }
  }
  return s;
}

StudySummary censoring_study(const ExperimentSpec& spec) {
  StudySummary s;
  const Instance inst = make_instance(spec);
  validate_instance(inst.graph, inst.features, inst.theta);
  const std::size_t d = inst.features.dimension();
  const SpreadModel truth(inst.graph, inst.features, inst.theta);

  ObservationSet obs(d);
  for (std::size_t i = 0; i < spec.cascades; ++i)
    obs.add(simulate_cascade(truth, spec.seeds, derive_seed(spec.seed, {i})));
  const SuffStats stats = suff_stats(obs);
  const double S = norm_bound_for(spec.algo, inst);
  const MleOptions opts = mle_options(spec.algo, S, obs.size());
  const MleResult fit = fit_mle(obs, initial_theta(inst, obs), opts);

  // Jointly attempted targets: groups whose feature mixes several edges.
  nlohmann::json aggregated = nlohmann::json::array();
  std::optional<double> primary;
  double primary_trials = -1.0;
  for (const auto& g : obs.groups()) {
    const Observation& rec = obs.records()[g.first_index];
    std::size_t support = 0;
    for (Eigen::Index k = 0; k < g.x.size(); ++k) support += g.x(k) != 0.0;
    if (support < 2) continue;
    const double est = link(g.x.dot(fit.theta));
    aggregated.push_back({{"target", rec.target},
                          {"trials", g.trials},
                          {"successes", g.successes},
                          {"empirical_rate", g.successes / g.trials},
                          {"estimate", est},
                          {"true", link(g.x.dot(inst.theta))}});
    if (g.trials > primary_trials) {
      primary_trials = g.trials;
      primary = est;
    }
  }

  // Direction the data never sees: eigenvector of M for its smallest eigenvalue.
  const SymmetricEigen eig = jacobi_eigen(stats.M);
  const Vector u = eig.vectors.col(0);
  const double null_eig = eig.values(0);
  double s_max = 0.0;
  {
    // Largest |s| with ||theta_hat + s u|| <= S.
    const double b = fit.theta.dot(u);
    const double c = fit.theta.squaredNorm() - S * S;
    s_max = std::max(0.0, std::min(-b + std::sqrt(std::max(0.0, b * b - c)),
                                   b + std::sqrt(std::max(0.0, b * b - c))));
  }
  const int points = 41;
  double ll_min = std::numeric_limits<double>::infinity();
  double ll_max = -ll_min;
  nlohmann::json profile = nlohmann::json::array();
  for (int i = 0; i < points; ++i) {
    const double step = -s_max + 2.0 * s_max * i / (points - 1);
    const Vector theta = fit.theta + step * u;
    const double ll = log_likelihood(theta, obs);
    ll_min = std::min(ll_min, ll);
    ll_max = std::max(ll_max, ll);
    std::vector<double> probs;
    for (double z : edge_scores(inst.features, theta)) probs.push_back(link(std::max(0.0, z)));
    profile.push_back({{"s", step}, {"log_likelihood", ll}, {"edge_probabilities", probs}});
  }

  const double target = threshold(spec, "aggregated_target", 0.72);
  const double tol = threshold(spec, "aggregated_tolerance", 0.02);
  const double max_variation = threshold(spec, "max_profile_variation", 1e-6);
  s.metrics["instance"] = inst.name;
  s.metrics["cascades"] = spec.cascades;
  s.metrics["observations"] = obs.size();
  s.metrics["aggregated"] = aggregated;
  s.metrics["aggregated_estimate"] = primary ? nlohmann::json(*primary) : nlohmann::json();
  s.metrics["mle_theta"] = std::vector<double>(fit.theta.data(), fit.theta.data() + d);
  s.metrics["mle_stationary"] = fit.stationary();
  s.metrics["null_eigenvalue"] = null_eig;
  s.metrics["null_direction"] = std::vector<double>(u.data(), u.data() + d);
  s.metrics["profile_span"] = 2.0 * s_max;
  s.metrics["profile_variation"] = ll_max - ll_min;
  s.metrics["profile"] = profile;
  s.thresholds["aggregated_target"] = target;
  s.thresholds["aggregated_tolerance"] = tol;
  s.thresholds["max_profile_variation"] = max_variation;
  s.passed = primary && std::abs(*primary - target) <= tol && ll_max - ll_min <= max_variation &&
             null_eig <= 1e-9 * std::max(1.0, stats.M.trace()) && s_max > 0.0;
  return s;
}

StudySummary single_run_study(const ExperimentSpec& spec) {
  StudySummary s;
  const Instance inst = make_instance(spec);
  const RunResult run = run_tpnodeim(inst, spec.algo, spec.seed, 0);
  if (!spec.out.empty()) write_run(spec.out, "run", run);
  s.metrics = run.metadata;
  s.metrics["late_early_ratio"] = late_early_ratio(run.logs);
  s.passed = run.growth_violations.empty();
  return s;
}

}  // namespace

AlgoConfig parse_algo_config(const nlohmann::json& j) {
  AlgoConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw std::invalid_argument("algo config must be an object");
  c.T = j.value("T", c.T);
  c.K = j.value("K", c.K);
  if (j.contains("norm_bound")) c.norm_bound = j.at("norm_bound").get<double>();
  if (j.contains("p_min_assumed")) c.p_min_assumed = j.at("p_min_assumed").get<double>();
  if (j.contains("delta")) c.delta = j.at("delta").get<double>();
  c.m_rand = j.value("m_rand", c.m_rand);
  c.n_mc = j.value("n_mc", c.n_mc);
  c.oracle_exact = j.value("oracle_exact", c.oracle_exact);
  if (j.contains("tau_override")) c.tau_override = j.at("tau_override").get<std::uint64_t>();
  if (j.contains("tau_scale")) c.tau_scale = j.at("tau_scale").get<double>();
  if (j.contains("radius_rule")) c.radius_rule = parse_radius_rule(j.at("radius_rule"));
  c.radius_scale = j.value("radius_scale", c.radius_scale);
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.mle_tol = j.value("mle_tol", c.mle_tol);
  c.oracle_knows_theta = j.value("oracle_knows_theta", c.oracle_knows_theta);
  c.n_eval = j.value("n_eval", c.n_eval);
  c.validate();
  return c;
}

ExperimentSpec parse_experiment_spec(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment spec must be a JSON object");
  ExperimentSpec s;
  s.study = j.value("study", s.study);
  if (s.study == "regret") s.study = "regret_scaling";
  if (std::find(kStudies.begin(), kStudies.end(), s.study) == kStudies.end())
    throw std::invalid_argument("unknown study kind '" + s.study + "'");
  if (j.contains("instance")) {
    const auto& in = j.at("instance");
    if (in.is_string()) {
      s.instance_kind = in.get<std::string>();
    } else {
      s.instance_kind = in.at("kind").get<std::string>();
      s.instance_params = in;
    }
  }
  s.replications = j.value("replications", s.replications);
  if (s.replications < 1) throw std::invalid_argument("replications must be >= 1");
  s.seed = j.value("seed", s.seed);
  s.algo = parse_algo_config(j.value("algo", nlohmann::json()));
  s.T_grid = j.value("T_grid", s.T_grid);
  s.cascades = j.value("cascades", s.cascades);
  s.delta = j.value("delta", s.delta);
  if (!(s.delta > 0.0 && s.delta < 0.5)) throw std::invalid_argument("delta must lie in (0, 0.5)");
  s.seeds = j.value("seeds", s.seeds);
  s.thresholds = j.value("thresholds", s.thresholds);
  if (j.contains("out")) s.out = j.at("out").get<std::string>();
  s.jobs = j.value("jobs", s.jobs);
  return s;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file " + path.string());
  return parse_experiment_spec(nlohmann::json::parse(in));
}

nlohmann::json StudySummary::to_json() const {
  return {{"study", study}, {"passed", passed}, {"metrics", metrics}, {"thresholds", thresholds},
          {"errors", errors}};
}

StudySummary run_study(const ExperimentSpec& spec) {
  StudySummary s;
  try {
    if (spec.study == "coverage") s = coverage_study(spec);
    else if (spec.study == "rho") s = rho_study(spec);
    else if (spec.study == "regret_scaling") s = regret_study(spec);
    else if (spec.study == "censoring") s = censoring_study(spec);
    else if (spec.study == "single_run") s = single_run_study(spec);
    else throw std::invalid_argument("unknown study kind '" + spec.study + "'");
  } catch (const std::exception& e) {
    s.passed = false;
    s.errors.push_back(e.what());
  }
  s.study = spec.study;
  s.metrics["seed"] = spec.seed;
  s.metrics["replications"] = spec.replications;
  if (!spec.out.empty()) {
    std::filesystem::create_directories(spec.out);
    std::ofstream(spec.out / "summary.json") << s.to_json().dump(2) << '\n';
  }
  return s;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : workers) t.join();
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs >= 2 points");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope needs distinct x values");
  return sxy / sxx;
}

double late_early_ratio(const std::vector<RoundLog>& logs) {
  if (logs.empty()) return 0.0;
  const std::size_t w = std::max<std::size_t>(1, logs.size() / 10);
  double early = 0.0, late = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    early += logs[i].regret;
    late += logs[logs.size() - 1 - i].regret;
  }
  if (early > 0.0) return late / early;
  return late > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

ObservationSet exploration_observations(const Instance& inst, const ExplorationDesign& design,
                                        std::size_t cascades, std::uint64_t seed) {
  const SpreadModel truth(inst.graph, inst.features, inst.theta);
  ObservationSet obs(inst.features.dimension());
  for (std::size_t i = 0; i < cascades; ++i) {
    const NodeId s[] = {inst.graph.edge(design.edges[i % design.edges.size()]).source};
    obs.add(simulate_cascade(truth, s, derive_seed(seed, {i})));
  }
  return obs;
}

}  // namespace cascade
