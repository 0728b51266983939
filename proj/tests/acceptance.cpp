// Acceptance run: one PASS/FAIL line per criterion; nonzero exit on any failure.
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cascade/bandit.hpp"
#include "cascade/generators.hpp"
#include "cascade/rng.hpp"
#include "cascade/studies.hpp"

using namespace cascade;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentSpec config(const char* name) {
  return load_experiment_spec(std::filesystem::path(CASCADE_CONFIG_DIR) / name);
}

Vector random_feature(Rng& rng, std::size_t d) {
  Vector x(static_cast<Eigen::Index>(d));
  for (auto& v : x) v = rng.uniform();
  return x * (0.2 + 0.8 * rng.uniform()) / x.norm();
}

double eigen_min(const Matrix& a) { return Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues()(0); }

Outcome diamond_example() {
  const Instance fig1 = fig1_instance();
  const std::vector<NodeId> ab{1, 2};
  const double agg = aggregated_prob(fig1.graph, fig1.features, ab, 3, fig1.theta);
  const double formula = 1.0 - (1.0 - 0.6) * (1.0 - 0.3);
  const SpreadModel model(fig1.graph, fig1.features, fig1.theta);
  const std::vector<NodeId> o{0};
  const std::size_t n = 100000;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += simulate_cascade(model, o, derive_seed(101, {i})).activated_at[3].has_value();
  const double freq = static_cast<double>(hits) / n;
  const bool ok = std::abs(agg - 0.72) <= 1e-12 && std::abs(formula - 0.72) <= 1e-12 && std::abs(freq - 0.72) <= 0.005;
  return {ok, fmt("aggregated=%.15f formula=%.15f freq=%.5f", agg, formula, freq)};
}

Outcome brute_force_equivalence() {
  Rng rng(202);
  int ok = 0, tried = 0;
  double worst = 0.0;
  while (tried < 10) {
    const std::size_t n = 5 + rng() % 4;
    const double p_edge = 0.15 + 0.3 * rng.uniform();
    const Instance inst = er_instance(n, p_edge, 0.1 + 0.6 * rng.uniform(), rng());
    if (inst.graph.edge_count() == 0 || inst.graph.edge_count() > 20) continue;
    ++tried;
    const SpreadModel model(inst.graph, inst.features, inst.theta);
    std::vector<NodeId> seeds{static_cast<NodeId>(rng() % n)};
    const SpreadEstimate mc = mc_influence(model, seeds, 100000, rng());
    const double exact = exact_influence(model, seeds);
    const double z = mc.se > 0 ? std::abs(mc.mean - exact) / mc.se : (mc.mean == exact ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    ok += z <= 3.0;
  }
  return {ok == 10, fmt("%d/10 within 3se, worst |z|=%.2f", ok, worst)};
}

Outcome derivative_check() {
  Rng rng(303);
  const double h = 1e-6;
  double worst_g = 0.0, worst_h = 0.0, max_eig = -INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 4;
    ObservationSet obs(d);
    Vector theta(static_cast<Eigen::Index>(d));
    for (auto& t : theta) t = 0.2 + 2.0 * rng.uniform();
    for (int i = 0; i < 30; ++i) {
      const Vector x = random_feature(rng, d);
      obs.add(x, rng.uniform() < link(x.dot(theta)));
    }
    const Vector g = grad_ll(theta, obs);
    const Matrix hess = hessian_ll(theta, obs);
    Vector fd_g(g.size());
    Matrix fd_h(hess.rows(), hess.cols());
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      Vector up = theta, dn = theta;
      up(k) += h;
      dn(k) -= h;
      fd_g(k) = (log_likelihood(up, obs) - log_likelihood(dn, obs)) / (2 * h);
      fd_h.col(k) = (grad_ll(up, obs) - grad_ll(dn, obs)) / (2 * h);
    }
    worst_g = std::max(worst_g, (fd_g - g).norm() / std::max(1.0, g.norm()));
    worst_h = std::max(worst_h, (fd_h - hess).norm() / std::max(1.0, hess.norm()));
    max_eig = std::max(max_eig, Eigen::SelfAdjointEigenSolver<Matrix>(hess).eigenvalues().maxCoeff());
  }
  return {worst_g <= 1e-5 && worst_h <= 1e-5 && max_eig <= 1e-10,
          fmt("grad rel err=%.2e hessian rel err=%.2e max eig=%.2e", worst_g, worst_h, max_eig)};
}

Outcome rho_oracle() {
  Rng rng(404);
  double worst = 0.0, worst_psd = INFINITY;
  for (int trial = 0; trial < 50; ++trial) {
    SuffStats st(3);
    for (int i = 0; i < 12; ++i) st.add(random_feature(rng, 3), rng.uniform() < 0.7);
    const double rho = rho_star(st).value;
    double scan = 0.0;
    for (int k = 0; k <= 10000; ++k)
      if (eigen_min(st.V - k * 1e-4 * st.M) >= -1e-12 * std::max(1.0, st.M.trace())) scan = k * 1e-4;
    worst = std::max(worst, std::abs(rho - scan));
    worst_psd = std::min(worst_psd, eigen_min(st.V - rho * st.M) / st.M.trace());
  }
  return {worst <= 2e-4 && worst_psd >= -1e-9,
          fmt("max |rho*-scan|=%.2e min eig(V-rho*M)/tr M=%.2e", worst, worst_psd)};
}

Outcome mle_consistency() {
  const Vector truth = (Vector(5) << 0.5, 1.0, 1.5, 0.8, 1.2).finished();
  int good = 0;
  double worst = 0.0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    Rng rng(derive_seed(505, {rep}));
    std::vector<Vector> pool;
    for (int k = 0; k < 5; ++k) pool.push_back(Vector::Unit(5, k));
    for (int k = 0; k < 10; ++k) pool.push_back(random_feature(rng, 5));
    ObservationSet obs(5);
    for (int i = 0; i < 100000; ++i) {
      const Vector& x = pool[rng() % pool.size()];
      obs.add(x, rng.uniform() < link(x.dot(truth)));
    }
    MleOptions opts;
    opts.tol = 1e-6 * static_cast<double>(obs.size());
    const MleResult r = fit_mle(obs, ridge_init(obs), opts);
    const double err = (r.theta - truth).norm();
    worst = std::max(worst, err);
    good += err <= 0.05;
  }
  return {good >= 18, fmt("%d/20 replications with error <= 0.05, worst %.4f", good, worst)};
}

Outcome study_outcome(const StudySummary& s, const std::string& detail) {
  std::string d = detail;
  for (const auto& e : s.errors) d += " error: " + e;
  return {s.passed, d};
}

Outcome coverage() {
  const StudySummary s = run_study(config("coverage.json"));
  const auto& c = s.metrics["coverage"];
  return study_outcome(s, fmt("contains(theta*) %d/%d = %.3f, precondition rate %.2f",
                              c.value("hits", 0), c.value("n", 0), c.value("frequency", 0.0),
                              s.metrics.value("precondition_rate", 0.0)));
}

StudySummary& rho_summary() {
  static StudySummary s = run_study(config("rho_chain.json"));
  return s;
}

Outcome rho_floor() {
  const StudySummary& s = rho_summary();
  return study_outcome(s, fmt("floor held in %.4f of %d exploitation rounds, rho* after exploration min %.3f vs %.3f",
                              s.metrics.value("floor_rate", 0.0), s.metrics.value("exploit_rounds", 0),
                              s.metrics["rho_after_exploration"].value("min", 0.0),
                              s.metrics.value("threshold", 0.0)));
}

Outcome design_growth() {
  std::size_t checks = rho_summary().metrics.value("growth_checks", std::size_t{0});
  std::size_t violations = rho_summary().metrics.value("growth_violations", std::size_t{0});
  std::vector<Instance> instances = small_fixtures();
  instances.push_back(fig1_instance());
  for (const Instance& inst : instances) {
    AlgoConfig cfg;
    cfg.T = 400;
    cfg.tau_override = 400;
    const RunResult run = run_tpnodeim(inst, cfg, 606);
    checks += run.growth_checks;
    violations += run.growth_violations.size();
  }
  return {checks > 0 && violations == 0, fmt("%zu super-round checks, %zu violations", checks, violations)};
}

Outcome greedy_guarantee() {
  const double ratio = 1.0 - std::exp(-1.0);
  int ok = 0, total = 0;
  double worst = INFINITY;
  for (const Instance& inst : small_fixtures()) {
    const SpreadModel model(inst.graph, inst.features, inst.theta);
    for (std::size_t k = 1; k <= 3; ++k) {
      const double g = greedy_im(ExactSpread(model), k, 0).value.mean;
      const double opt = exhaustive_opt(model, k).value;
      worst = std::min(worst, g / opt);
      ok += g >= ratio * opt - 1e-12;
      ++total;
    }
  }
  return {ok == total, fmt("%d/%d cases, worst greedy/optimum %.4f", ok, total, worst)};
}

Outcome regret() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"regret_fig1.json", "regret_er8.json"}) {
    const StudySummary s = run_study(config(name));
    pass &= s.passed;
    if (!detail.empty()) detail += "; ";
    detail += fmt("%s slope=%.3f late/early=%.4f", s.metrics.value("instance", std::string()).c_str(),
                  s.metrics.value("slope", NAN), s.metrics.value("worst_late_early_ratio", NAN));
    for (const auto& e : s.errors) detail += " error: " + e;
  }
  return {pass, detail};
}

Outcome censoring() {
  const StudySummary s = run_study(config("censoring.json"));
  return study_outcome(s, fmt("aggregated=%.4f profile variation=%.2e",
                              s.metrics.value("aggregated_estimate", NAN),
                              s.metrics.value("profile_variation", NAN)));
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "diamond aggregated probability and activation frequency", 10, diamond_example},
      {2, "Monte Carlo spread matches brute force", 120, brute_force_equivalence},
      {3, "gradient and Hessian match finite differences", 30, derivative_check},
      {4, "rho* matches the grid-scan oracle", 30, rho_oracle},
      {5, "MLE consistency in five dimensions", 120, mle_consistency},
      {6, "confidence ellipsoid coverage", 600, coverage},
      {7, "rho* floor during exploitation", 600, rho_floor},
      {8, "lambda_min(M) grows linearly over exploration", 600, design_growth},
      {9, "greedy approximation guarantee", 60, greedy_guarantee},
      {10, "end-to-end regret scaling", 1800, regret},
      {11, "censoring: aggregate identified, split not", 60, censoring},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.passed && secs <= c.budget_s;
    failures += !pass;
    std::printf("%s [%d] %s (%s; %.1fs of %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
