#pragma once

// Closed-form bounds: geometric moments, theta, local-time moments, speed
// lower bounds, regeneration tail and moment bounds, covariance bounds.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwtree/branching.hpp"
#include "rwtree/model.hpp"

namespace rwtree {

inline constexpr int kDefaultGeomCap = 24;

// Rows a^(1..cap) of the geometric-moment coefficients:
// a_j^(n) = j (a_{j-1}^(n-1) - a_j^(n-1)), M(n,q) = sum_j a_j^(n) q^-j.
class GeomMomentTable {
 public:
  explicit GeomMomentTable(int cap = kDefaultGeomCap);

  int cap() const noexcept { return cap_; }
  // Coefficients (a_1, ..., a_n) of row n.
  const std::vector<long double>& row(int n) const;
  // Direct evaluation of sum_j a_j q^-j. Loses accuracy for large n.
  long double eval_row(int n, long double q) const;
  // c_n = sum_j max(a_j^(n), 0).
  long double c(int n) const;

 private:
  int cap_;
  std::vector<std::vector<long double>> rows_;
};

const GeomMomentTable& default_geom_table();

// E[G^n] for G geometric on {1,2,...} with success probability q.
// Evaluated as A_n(1-q) / q^n with the Eulerian polynomial A_n, which has
// positive coefficients. DomainError for q outside (0,1] or n outside 1..cap.
double geometric_moment(int n, double q, int cap = kDefaultGeomCap);
// M(n, 1-u) - 1 without cancellation for small u.
double geometric_moment_excess(int n, double u, int cap = kDefaultGeomCap);
double c_constant(int n, int cap = kDefaultGeomCap);

struct EnvMoments {
  double inv_a_p = 0.0;          // E[A^-p]
  double one_plus_inv_sum_p = 0.0;  // E[(1 + 1/sum_i A^(i))^p]
};

EnvMoments env_moments(const EnvSpec& spec, double p);

// theta(p, n); p is an integer order >= 1.
double theta(const EnvSpec& spec, int p, int n, int cap = kDefaultGeomCap);

// A bound entry. `value` may be +inf (overflow); inapplicable entries carry
// the violated precondition in `reason`.
struct BoundValue {
  bool applicable = false;
  double value = 0.0;
  std::string reason;

  static BoundValue ok(double v, std::string note = {}) { return BoundValue{true, v, std::move(note)}; }
  static BoundValue inapplicable(std::string why) { return BoundValue{false, 0.0, std::move(why)}; }
};

struct SeriesOptions {
  double tol = 1e-14;
  int max_terms = 400;
  int cap = kDefaultGeomCap;
};

// Bound on E[L(rho)^p]. RWRE: the Hoelder series in theta(p+eps, n) with
// q = 1 + eps/p, q' = 1 + p/eps. ORRW: M(p, (1-alpha) b/(b+delta)), which
// needs delta > 1.
BoundValue l_rho_moment_bound(const EnvSpec& spec, int p, int eps, double alpha, const SeriesOptions& opt = {});

struct SpeedBounds {
  BoundValue theorem;     // RWRE (1-alpha)/E[L]; ORRW (1-alpha)^2 b/(b+delta)
  BoundValue comparison;  // ORRW with delta < b: (b-delta)/(b+delta)
  BoundValue lower;       // the best applicable lower bound
  BoundValue upper;       // ORRW: b/(b+delta)
};

SpeedBounds speed_bounds(const EnvSpec& spec, double alpha, const SeriesOptions& opt = {});

// gamma^(n-1); the associated level is n * psi * zeta.
double ell1_tail_bound(int n, double gamma);

// Bound on E[l_1^2] from the tail bound summed block by block.
BoundValue ell1_second_moment_bound(double gamma, int psi, int zeta);

// Bound on E[Pi^p] for a real order p >= 0 (Lyapunov for non-integers).
BoundValue pi_moment_bound(double p, double gamma, int psi, int zeta, double alpha, int cap = kDefaultGeomCap);

// Bound on E[tau_1^p] with p + eps an integer.
BoundValue tau1_moment_bound(const EnvSpec& spec, int p, int eps, double gamma, int psi, int zeta, double alpha,
                             const SeriesOptions& opt = {});

// Smallest even integer >= floor(3/w) + 1.
int covariance_a(double w);

struct CovarianceBounds {
  int a = 0;
  BoundValue ell1_sq;
  BoundValue tau1_sq;
  BoundValue tau1_mean;
  BoundValue event_prob;  // probability factor of the lower bound
  BoundValue lower;
  BoundValue upper;
};

CovarianceBounds covariance_bounds(const EnvSpec& spec, double w, double alpha, double gamma, int psi, int zeta,
                                   const SeriesOptions& opt = {});

struct BoundsParams {
  int psi = 0;  // 0 selects automatically
  int psi_max = 6;
  int p = 1;
  int eps = 1;
  int geom_cap = kDefaultGeomCap;
  double series_tol = 1e-14;
  int theta_terms = 8;
  int tail_n_max = 5;
  std::uint64_t offspring_samples = 100'000;
  std::uint64_t offspring_seed = 1;
  unsigned workers = 1;
};

struct BoundsReport {
  EnvSpec env;
  TransienceResult transience;
  PsiSelection selection;
  std::optional<OffspringDist> offspring;
  std::optional<BranchingSummary> branching;
  // Conservative branching values used by every bound (upper interval ends
  // for Monte Carlo laws).
  double alpha_used = 1.0;
  double gamma_used = 1.0;
  std::optional<EnvMoments> env_moments_p;  // order p + eps
  std::vector<double> theta_table;          // theta(p + eps, n), n = 1..
  BoundValue l_rho;                         // E[L(rho)^p]
  SpeedBounds speed;
  std::vector<double> ell1_tail;  // gamma^(n-1), n = 1..tail_n_max
  int ell1_scale = 0;             // psi * zeta
  BoundValue pi_mean;
  BoundValue tau1_mean;
  CovarianceBounds covariance;
  std::vector<std::string> inapplicable;  // bound families without a value

  bool all_applicable() const noexcept { return inapplicable.empty(); }
};

BoundsReport compute_bounds(const EnvSpec& spec, const BoundsParams& params);

}  // namespace rwtree
