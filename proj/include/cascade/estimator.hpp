#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cascade/diffusion.hpp"
#include "cascade/linalg.hpp"

namespace cascade {

/// theta outside the log-likelihood domain (x_i^T theta <= 0 with Y_i = 1).
class DomainError : public std::domain_error {
 public:
  DomainError(std::size_t index, double score);
  std::size_t observation_index() const { return index_; }
  double score() const { return score_; }

 private:
  std::size_t index_;
  double score_;
};

struct Observation {
  Vector x;
  bool y = false;
  std::uint32_t step = 0;
  NodeId target = 0;
};

/// Hyper-edge observations (x_i, Y_i). Identical feature vectors are also
/// pooled into groups so likelihood terms cost O(#distinct features).
class ObservationSet {
 public:
  struct Group {
    Vector x;
    double trials = 0.0;
    double successes = 0.0;
    std::size_t first_index = 0;          // first observation with this feature
    std::size_t first_success_index = 0;  // valid when successes > 0
  };

  explicit ObservationSet(std::size_t dimension);

  void add(const Vector& x, bool y, std::uint32_t step = 0, NodeId target = 0);
  void add(const HyperEdgeObservation& obs);
  void add(const CascadeTrace& trace);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<Observation>& records() const { return records_; }
  const std::vector<Group>& groups() const { return groups_; }

 private:
  std::size_t dimension_;
  std::vector<Observation> records_;
  std::vector<Group> groups_;
  std::unordered_map<std::string, std::size_t> group_index_;
};

/// l(theta) = sum_i Y_i ln m(z_i) - (1 - Y_i) z_i, z_i = x_i^T theta.
double log_likelihood(const Vector& theta, const ObservationSet& obs);
/// sum_i x_i (Y_i / m(z_i) - 1).
Vector grad_ll(const Vector& theta, const ObservationSet& obs);
/// -sum_i x_i x_i^T Y_i e^{-z_i} / m(z_i)^2.
Matrix hessian_ll(const Vector& theta, const ObservationSet& obs);

struct MleOptions {
  double tol = 1e-6;
  int max_iter = 5000;
  double norm_bound = std::numeric_limits<double>::infinity();
  double eps_dom = 1e-8;
  bool restart = true;
};

struct MleResult {
  Vector theta;
  int iterations = 0;
  double grad_norm = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;    // ||grad|| <= tol
  bool at_boundary = false;  // stationary for the projected step with a constraint active
  int restarts = 0;

  /// Either kind of stationarity.
  bool stationary() const { return converged || at_boundary; }
};

/// Projected gradient ascent over {||theta|| <= S, x_i^T theta >= eps_dom for
/// every i}: Barzilai-Borwein step, projection, then Armijo halving along the
/// feasible direction against the best of the last 10 values.
/// Throws std::invalid_argument on empty data or an init that cannot be made
/// feasible. Non-convergence is reported through the flags.
MleResult fit_mle(const ObservationSet& obs, const Vector& theta_init, const MleOptions& opts);

/// Euclidean projection onto the fitting domain (Dykstra's algorithm).
Vector project_to_domain(const ObservationSet& obs, const Vector& theta, double norm_bound,
                         double eps_dom);

/// Tabular start: every edge probability 1/2.
Vector tabular_init(const FeatureMap& fm);
/// Ridge regression of the inverse-link of smoothed outcomes, pushed to a
/// strictly positive score on every observation when features are nonnegative.
Vector ridge_init(const ObservationSet& obs);

struct SuffStats {
  Matrix V;  // sum x x^T Y
  Matrix M;  // sum x x^T
  std::size_t n = 0;

  explicit SuffStats(std::size_t dimension = 0);
  void add(const Vector& x, bool y);
  std::size_t dimension() const { return static_cast<std::size_t>(M.rows()); }
};

SuffStats suff_stats(const ObservationSet& obs);
/// Adds every record of new_obs. Throws std::invalid_argument on dimension mismatch.
SuffStats update(SuffStats stats, const ObservationSet& new_obs);

struct RhoStar {
  double value = 0.0;
  bool singular_m = false;
};

/// max{rho : V - rho M >= 0} as lambda_min(L^{-1} V L^{-T}) with M = L L^T,
/// clamped to [0,1]. Singular M (lambda_min <= tol_pd * max(1, tr M)) yields 0.
RhoStar rho_star(const SuffStats& stats, double tol_pd = 1e-10);

/// e^{-z} / m(z)^2 = 1 / (4 sinh^2(z/2)), decreasing on z > 0.
double link_curvature(double z);

/// Lower bound on P(sum Y_i x_i x_i^T >= c p sum x_i x_i^T) for independent
/// Y_i ~ Bern(>= p): 1 - d exp(-((1-c)^2 p^2 lambda^2 / 2) / (n D + (1-c) p^2 lambda / 3)),
/// clamped to [0,1]. lambda is lambda_min(M) and D bounds ||x_i||^4.
double concentration_bound(double p, double c, double lambda_min_m, std::size_t n, double D,
                           std::size_t d);

/// 1 / (4 sinh^2((S+1)/2)): infimum of e^{-z}/m(z)^2 over z <= S + 1.
double kappa_from_bound(double norm_bound);

/// (4 R^2 / (kappa^2 rho)) ((d/2) ln(1 + 2n/d) + ln(1/delta2)).
double confidence_radius_sq(std::size_t n, std::size_t d, double rho, double kappa, double R,
                            double delta2);

/// kappa^2 rho^2 lambda_min(M) >= 16 R^2 (d + ln(1/delta1)).
bool precondition_check(const SuffStats& stats, double rho, double kappa, double R,
                        double delta1);

struct EllipsoidParams {
  double kappa = 0.0;
  double R = 0.0;
  double delta1 = 0.05;
  double delta2 = 0.05;
  double rho_floor = 0.0;  // radius uses max(rho*, rho_floor)
};

/// {theta : (theta - center)^T shape (theta - center) <= radius_sq}.
struct ConfidenceEllipsoid {
  Vector center;
  Matrix shape;
  double radius_sq = 0.0;
  double rho_star = 0.0;
  double rho_eff = 0.0;
  bool singular_m = false;
  bool precondition_ok = false;
  double kappa = 0.0;
  double R = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  std::size_t n = 0;
};

/// Radius is +inf when rho_eff or kappa is 0.
ConfidenceEllipsoid build_ellipsoid(const SuffStats& stats, const Vector& center,
                                    const EllipsoidParams& params);

bool ellipsoid_contains(const ConfidenceEllipsoid& ell, const Vector& theta);

/// CSV with header step,target,y,x_1..x_d.
void write_observations_csv(std::ostream& out, const ObservationSet& obs);
ObservationSet read_observations_csv(std::istream& in);

}  // namespace cascade
