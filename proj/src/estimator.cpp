#include "cascade/estimator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

#include "cascade/rng.hpp"

namespace cascade {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;
constexpr std::size_t kNonmonotoneWindow = 10;
constexpr double kMinStep = 1e-12;
constexpr double kMaxStep = 1e12;

std::string feature_key(const Vector& x) {
  std::string key(static_cast<std::size_t>(x.size()) * sizeof(double), '\0');
  std::memcpy(key.data(), x.data(), key.size());
  return key;
}

// e^{-z} / m(z)^2 written as 1 / (4 sinh^2(z/2)).
double curvature(double z) {
  const double s = std::sinh(0.5 * z);
  return 1.0 / (4.0 * s * s);
}

void check_dimension(const Vector& theta, const ObservationSet& obs) {
  if (static_cast<std::size_t>(theta.size()) != obs.dimension())
    throw std::invalid_argument("theta dimension " + std::to_string(theta.size()) +
                                " does not match observations (" +
                                std::to_string(obs.dimension()) + ")");
}

double ll_or_neg_inf(const Vector& theta, const ObservationSet& obs) {
  try {
    return log_likelihood(theta, obs);
  } catch (const DomainError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

bool in_domain(const ObservationSet& obs, const Vector& theta, double norm_bound,
               double eps_dom) {
  if (theta.norm() > norm_bound) return false;
  for (const auto& g : obs.groups()) {
    if (g.x.squaredNorm() == 0.0) continue;
    if (g.x.dot(theta) < eps_dom - 1e-12) return false;
  }
  return true;
}

MleResult ascend(const ObservationSet& obs, Vector theta, const MleOptions& opts) {
  MleResult res;
  double ll = log_likelihood(theta, obs);
  Vector g = grad_ll(theta, obs);
  double step = 1.0 / std::max(1.0, g.norm());
  std::array<double, kNonmonotoneWindow> recent;
  recent.fill(ll);

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (g.norm() <= opts.tol) {
      res.converged = true;
      break;
    }
    // Stationarity of the projected step at unit scale.
    const Vector probe = project_to_domain(obs, theta + g, opts.norm_bound, opts.eps_dom);
    if ((probe - theta).norm() <= opts.tol) {
      res.at_boundary = true;
      break;
    }

    // Feasible direction from a spectral step; halve along it.
    const Vector dir =
        project_to_domain(obs, theta + step * g, opts.norm_bound, opts.eps_dom) - theta;
    const double slope = g.dot(dir);
    const double reference = *std::max_element(recent.begin(), recent.end());
    bool accepted = false;
    Vector trial;
    double ll_trial = 0.0;
    double scale = 1.0;
    for (int h = 0; h < kMaxHalvings; ++h, scale *= 0.5) {
      trial = theta + scale * dir;
      ll_trial = ll_or_neg_inf(trial, obs);
      if (ll_trial >= reference + kArmijo * scale * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted || slope <= 0.0) break;

    const Vector g_new = grad_ll(trial, obs);
    const Vector ds = trial - theta;
    const double sy = ds.dot(g_new - g);
    step = sy < 0.0 ? ds.squaredNorm() / -sy : 2.0 * step;
    step = std::clamp(step, kMinStep, kMaxStep);
    theta = std::move(trial);
    ll = ll_trial;
    g = g_new;
    recent[static_cast<std::size_t>(it) % kNonmonotoneWindow] = ll;
  }

  res.theta = std::move(theta);
  res.iterations = it;
  res.grad_norm = g.norm();
  res.log_likelihood = ll;
  return res;
}

}  // namespace

DomainError::DomainError(std::size_t index, double score)
    : std::domain_error("observation " + std::to_string(index) +
                        " has Y=1 with x^T theta = " + std::to_string(score) +
                        " <= 0, outside the log-likelihood domain"),
      index_(index),
      score_(score) {}

ObservationSet::ObservationSet(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw std::invalid_argument("observation dimension must be positive");
}

void ObservationSet::add(const Vector& x, bool y, std::uint32_t step, NodeId target) {
  if (static_cast<std::size_t>(x.size()) != dimension_)
    throw std::invalid_argument("observation feature has dimension " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(dimension_));
  const std::size_t index = records_.size();
  records_.push_back({x, y, step, target});
  auto [it, inserted] = group_index_.try_emplace(feature_key(x), groups_.size());
  if (inserted) groups_.push_back({x, 0.0, 0.0, index, 0});
  Group& g = groups_[it->second];
  if (y && g.successes == 0.0) g.first_success_index = index;
  g.trials += 1.0;
  if (y) g.successes += 1.0;
}

void ObservationSet::add(const HyperEdgeObservation& obs) {
  add(obs.feature, obs.outcome, obs.step, obs.target);
}

void ObservationSet::add(const CascadeTrace& trace) {
  for (const auto& o : trace.observations) add(o);
}

double log_likelihood(const Vector& theta, const ObservationSet& obs) {
  check_dimension(theta, obs);
  double ll = 0.0;
  for (const auto& g : obs.groups()) {
    const double z = g.x.dot(theta);
    if (g.successes > 0.0) {
      if (!(z > 0.0)) throw DomainError(g.first_success_index, z);
      ll += g.successes * log_link(z);
    }
    ll -= (g.trials - g.successes) * z;
  }
  return ll;
}

Vector grad_ll(const Vector& theta, const ObservationSet& obs) {
  check_dimension(theta, obs);
  Vector grad = Vector::Zero(theta.size());
  for (const auto& g : obs.groups()) {
    const double z = g.x.dot(theta);
    double w = -g.trials;
    if (g.successes > 0.0) {
      if (!(z > 0.0)) throw DomainError(g.first_success_index, z);
      w += g.successes / link(z);
    }
    grad += w * g.x;
  }
  return grad;
}

Matrix hessian_ll(const Vector& theta, const ObservationSet& obs) {
  check_dimension(theta, obs);
  Matrix h = Matrix::Zero(theta.size(), theta.size());
  for (const auto& g : obs.groups()) {
    if (g.successes == 0.0) continue;
    const double z = g.x.dot(theta);
    if (!(z > 0.0)) throw DomainError(g.first_success_index, z);
    h.noalias() -= (g.successes * curvature(z)) * g.x * g.x.transpose();
  }
  return h;
}

Vector project_to_domain(const ObservationSet& obs, const Vector& theta, double norm_bound,
                         double eps_dom) {
  if (in_domain(obs, theta, norm_bound, eps_dom)) return theta;

  const auto& groups = obs.groups();
  auto violated = [&](const Vector& t, std::vector<char>& active) {
    bool added = false;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (active[i] || groups[i].x.squaredNorm() == 0.0) continue;
      if (groups[i].x.dot(t) < eps_dom - 1e-12) {
        active[i] = 1;
        added = true;
      }
    }
    return added;
  };

  std::vector<char> active(groups.size(), 0);
  violated(theta, active);
  Vector x = theta;
  for (int outer = 0; outer < 50; ++outer) {
    // Dykstra over the active halfspaces plus the ball, restarted from theta.
    std::vector<std::size_t> sets;
    for (std::size_t i = 0; i < groups.size(); ++i)
      if (active[i]) sets.push_back(i);
    std::vector<Vector> inc(sets.size() + 1, Vector::Zero(theta.size()));
    x = theta;
    for (int cycle = 0; cycle < 5000; ++cycle) {
      const Vector before = x;
      for (std::size_t k = 0; k < sets.size(); ++k) {
        const Vector y = x + inc[k];
        const Vector& a = groups[sets[k]].x;
        const double gap = eps_dom - a.dot(y);
        x = gap > 0.0 ? Vector(y + (gap / a.squaredNorm()) * a) : y;
        inc[k] = y - x;
      }
      {
        const Vector y = x + inc.back();
        const double norm = y.norm();
        x = norm > norm_bound ? Vector(y * (norm_bound / norm)) : y;
        inc.back() = y - x;
      }
      if ((x - before).norm() <= 1e-15 * (1.0 + x.norm())) break;
    }
    if (!violated(x, active)) break;
  }
  return x;
}

Vector tabular_init(const FeatureMap& fm) {
  if (!fm.tabular()) throw std::invalid_argument("tabular_init needs tabular features");
  Vector theta(static_cast<Eigen::Index>(fm.dimension()));
  for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = M_LN2 / fm.matrix()(k, k);
  return theta;
}

Vector ridge_init(const ObservationSet& obs) {
  const auto d = static_cast<Eigen::Index>(obs.dimension());
  Matrix a = Matrix::Identity(d, d);
  Vector b = Vector::Zero(d);
  for (const auto& g : obs.groups()) {
    const double rate = std::clamp((g.successes + 0.5) / (g.trials + 1.0), 0.05, 0.95);
    a.noalias() += g.trials * g.x * g.x.transpose();
    b += (g.trials * inverse_link(rate)) * g.x;
  }
  Vector theta = a.ldlt().solve(b);

  // Shift along the all-ones direction until every score is clearly positive.
  const Vector ones = Vector::Ones(d);
  const double margin = 1e-3;
  double shift = 0.0;
  for (const auto& g : obs.groups()) {
    const double z = g.x.dot(theta);
    if (z >= margin || g.x.squaredNorm() == 0.0) continue;
    const double slope = g.x.dot(ones);
    if (slope <= 0.0)
      throw std::invalid_argument("ridge_init: cannot find a strictly feasible start");
    shift = std::max(shift, (margin - z) / slope);
  }
  return theta + shift * ones;
}

MleResult fit_mle(const ObservationSet& obs, const Vector& theta_init, const MleOptions& opts) {
  if (obs.empty()) throw std::invalid_argument("fit_mle: no observations");
  check_dimension(theta_init, obs);
  const Vector start = project_to_domain(obs, theta_init, opts.norm_bound, opts.eps_dom);
  if (!std::isfinite(ll_or_neg_inf(start, obs)))
    throw std::invalid_argument("fit_mle: initial point is infeasible");

  MleResult res = ascend(obs, start, opts);
  if (!res.stationary() && opts.restart) {
    Rng rng(0x5EEDULL);
    Vector jitter(start.size());
    for (Eigen::Index k = 0; k < jitter.size(); ++k) jitter(k) = rng.uniform() - 0.5;
    const double scale = 0.1 * std::max(1.0, start.norm()) / std::max(1e-12, jitter.norm());
    const Vector perturbed =
        project_to_domain(obs, start + scale * jitter, opts.norm_bound, opts.eps_dom);
    if (std::isfinite(ll_or_neg_inf(perturbed, obs))) {
      MleResult second = ascend(obs, perturbed, opts);
      second.iterations += res.iterations;
      if (second.stationary() || second.log_likelihood > res.log_likelihood) res = second;
    }
    res.restarts = 1;
  }
  return res;
}

SuffStats::SuffStats(std::size_t dimension)
    : V(Matrix::Zero(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(dimension))),
      M(Matrix::Zero(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(dimension))) {}

void SuffStats::add(const Vector& x, bool y) {
  if (static_cast<std::size_t>(x.size()) != dimension())
    throw std::invalid_argument("SuffStats: feature dimension mismatch");
  const Matrix outer = x * x.transpose();
  M += outer;
  if (y) V += outer;
  ++n;
}

SuffStats suff_stats(const ObservationSet& obs) { return update(SuffStats(obs.dimension()), obs); }

SuffStats update(SuffStats stats, const ObservationSet& new_obs) {
  if (stats.dimension() != new_obs.dimension())
    throw std::invalid_argument("SuffStats: dimension mismatch");
  for (const auto& r : new_obs.records()) stats.add(r.x, r.y);
  return stats;
}

RhoStar rho_star(const SuffStats& stats, double tol_pd) {
  RhoStar out;
  const double scale = std::max(1.0, stats.M.trace());
  if (stats.n == 0 || min_eigenvalue(stats.M) <= tol_pd * scale) {
    out.singular_m = true;
    return out;
  }
  Eigen::LLT<Matrix> llt(stats.M);
  if (llt.info() != Eigen::Success) {
    out.singular_m = true;
    return out;
  }
  const auto lower = llt.matrixL();
  const Matrix left = lower.solve(stats.V);                     // L^{-1} V
  Matrix whitened = lower.solve(left.transpose()).transpose();  // L^{-1} V L^{-T}
  symmetrize(whitened);
  out.value = std::clamp(min_eigenvalue(whitened), 0.0, 1.0);
  return out;
}

double concentration_bound(double p, double c, double lambda_min_m, std::size_t n, double D,
                           std::size_t d) {
  const double gap = 1.0 - c;
  const double num = 0.5 * gap * gap * p * p * lambda_min_m * lambda_min_m;
  const double den = static_cast<double>(n) * D + gap * p * p * lambda_min_m / 3.0;
  if (!(den > 0.0)) return 0.0;
  return std::clamp(1.0 - static_cast<double>(d) * std::exp(-num / den), 0.0, 1.0);
}

double link_curvature(double z) { return curvature(z); }

double kappa_from_bound(double norm_bound) {
  if (!(norm_bound >= 0.0)) throw std::invalid_argument("norm bound must be >= 0");
  return curvature(norm_bound + 1.0);
}

double confidence_radius_sq(std::size_t n, std::size_t d, double rho, double kappa, double R,
                            double delta2) {
  if (d == 0 || !(rho > 0.0) || !(kappa > 0.0) || !(R > 0.0))
    throw std::invalid_argument("confidence_radius_sq: constants must be positive");
  if (!(delta2 > 0.0 && delta2 < 1.0))
    throw std::invalid_argument("confidence_radius_sq: delta2 must lie in (0,1)");
  const double dd = static_cast<double>(d);
  const double log_term =
      0.5 * dd * std::log1p(2.0 * static_cast<double>(n) / dd) - std::log(delta2);
  return 4.0 * R * R / (kappa * kappa * rho) * log_term;
}

bool precondition_check(const SuffStats& stats, double rho, double kappa, double R,
                        double delta1) {
  if (stats.dimension() == 0) return false;
  const double lhs = kappa * kappa * rho * rho * min_eigenvalue(stats.M);
  const double rhs =
      16.0 * R * R * (static_cast<double>(stats.dimension()) + std::log(1.0 / delta1));
  return lhs >= rhs;
}

ConfidenceEllipsoid build_ellipsoid(const SuffStats& stats, const Vector& center,
                                    const EllipsoidParams& params) {
  if (static_cast<std::size_t>(center.size()) != stats.dimension())
    throw std::invalid_argument("build_ellipsoid: center dimension mismatch");
  ConfidenceEllipsoid ell;
  ell.center = center;
  ell.shape = stats.V;
  const RhoStar rho = rho_star(stats);
  ell.rho_star = rho.value;
  ell.singular_m = rho.singular_m;
  ell.rho_eff = std::max(rho.value, params.rho_floor);
  ell.kappa = params.kappa;
  ell.R = params.R;
  ell.delta1 = params.delta1;
  ell.delta2 = params.delta2;
  ell.n = stats.n;
  if (ell.rho_eff > 0.0 && params.kappa > 0.0) {
    ell.radius_sq = confidence_radius_sq(stats.n, stats.dimension(), ell.rho_eff, params.kappa,
                                         params.R, params.delta2);
    ell.precondition_ok =
        precondition_check(stats, ell.rho_eff, params.kappa, params.R, params.delta1);
  } else {
    ell.radius_sq = std::numeric_limits<double>::infinity();
  }
  return ell;
}

bool ellipsoid_contains(const ConfidenceEllipsoid& ell, const Vector& theta) {
  if (theta.size() != ell.center.size())
    throw std::invalid_argument("ellipsoid_contains: dimension mismatch");
  if (std::isinf(ell.radius_sq)) return true;
  const Vector diff = theta - ell.center;
  return diff.dot(ell.shape * diff) <= ell.radius_sq;
}

}  // namespace cascade
