#include "rwtree/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rwtree/error.hpp"

namespace rwtree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double to_double(long double x) {
  if (!std::isfinite(x) || x > static_cast<long double>(std::numeric_limits<double>::max())) return kInf;
  return static_cast<double>(x);
}

constexpr int kEulerianMax = 160;

// Eulerian numbers A(n, k), k = 0..n-1, for n = 1..kEulerianMax.
const std::vector<std::vector<long double>>& eulerian() {
  static const std::vector<std::vector<long double>> rows = [] {
    std::vector<std::vector<long double>> out = {{}, {1.0L}};
    for (int n = 2; n <= kEulerianMax; ++n) {
      const auto& prev = out[n - 1];
      std::vector<long double> row(static_cast<std::size_t>(n), 0.0L);
      for (int k = 0; k < n; ++k) {
        const long double keep = k < n - 1 ? prev[k] : 0.0L;
        const long double shift = k >= 1 ? prev[k - 1] : 0.0L;
        row[k] = (k + 1) * keep + (n - k) * shift;
      }
      out.push_back(std::move(row));
    }
    return out;
  }();
  return rows;
}

void check_order(int n, int cap) {
  if (n < 1 || n > cap || n > kEulerianMax) throw DomainError("geometric moment order must lie in 1..cap");
}

}  // namespace

GeomMomentTable::GeomMomentTable(int cap) : cap_(cap) {
  if (cap < 1) throw DomainError("geometric table cap must be >= 1");
  rows_.resize(static_cast<std::size_t>(cap) + 1);
  rows_[1] = {1.0L};
  for (int n = 2; n <= cap; ++n) {
    const auto& prev = rows_[n - 1];
    std::vector<long double> row(static_cast<std::size_t>(n), 0.0L);
    for (int j = 1; j <= n; ++j) {
      const long double lower = j >= 2 ? prev[j - 2] : 0.0L;
      const long double same = j <= n - 1 ? prev[j - 1] : 0.0L;
      row[j - 1] = j * (lower - same);
    }
    rows_[n] = std::move(row);
  }
}

const std::vector<long double>& GeomMomentTable::row(int n) const {
  check_order(n, cap_);
  return rows_[n];
}

long double GeomMomentTable::eval_row(int n, long double q) const {
  const auto& r = row(n);
  long double s = 0.0L;
  for (std::size_t j = r.size(); j-- > 0;) s = s / q + r[j];
  return s / q;
}

long double GeomMomentTable::c(int n) const {
  long double s = 0.0L;
  for (long double a : row(n)) s += std::max(a, 0.0L);
  return s;
}

const GeomMomentTable& default_geom_table() {
  static const GeomMomentTable table(kDefaultGeomCap);
  return table;
}

double geometric_moment(int n, double q, int cap) {
  check_order(n, cap);
  if (!(q > 0.0) || q > 1.0) throw DomainError("geometric moment needs q in (0,1]");
  const auto& row = eulerian()[n];
  const long double t = 1.0L - static_cast<long double>(q);
  long double s = 0.0L;
  for (std::size_t k = row.size(); k-- > 0;) s = s * t + row[k];
  return to_double(s / std::pow(static_cast<long double>(q), n));
}

double geometric_moment_excess(int n, double u, int cap) {
  check_order(n, cap);
  if (!(u >= 0.0) || !(u < 1.0)) throw DomainError("geometric moment excess needs u in [0,1)");
  if (u >= 0.5) return geometric_moment(n, 1.0 - u, cap) - 1.0;
  // sum_{k >= 2} (k^n - 1) (1-u) u^(k-1)
  long double s = 0.0L;
  long double upow = u;
  for (int k = 2; k < 100000; ++k) {
    const long double term = (std::pow(static_cast<long double>(k), n) - 1.0L) * (1.0L - u) * upow;
    s += term;
    if (k > n && term < 1e-21L * s) break;
    upow *= u;
    if (upow == 0.0L) break;
  }
  return to_double(s);
}

double c_constant(int n, int cap) {
  if (cap == kDefaultGeomCap) return to_double(default_geom_table().c(n));
  return to_double(GeomMomentTable(cap).c(n));
}

EnvMoments env_moments(const EnvSpec& spec, double p) {
  if (spec.model != ModelKind::rwre) throw Unsupported("environment moments are defined for RWRE");
  EnvMoments m;
  for (const Atom& a : spec.support) m.inv_a_p += a.prob * std::pow(a.value, -p);
  for (const auto& [a, prob] : enumerate_env(spec)) {
    double sum = 0.0;
    for (double x : a) sum += x;
    m.one_plus_inv_sum_p += prob * std::pow(1.0 + 1.0 / sum, p);
  }
  return m;
}

double theta(const EnvSpec& spec, int p, int n, int cap) {
  if (p < 1 || n < 1) throw DomainError("theta needs p >= 1 and n >= 1");
  const EnvMoments em = env_moments(spec, p);
  const double c = c_constant(p, cap);
  if (!std::isfinite(em.inv_a_p)) return kInf;
  if (n == 1) return c * em.one_plus_inv_sum_p;
  double geo = 0.0, pw = 1.0;
  for (int i = 0; i < n; ++i) {
    geo += pw;
    pw *= em.inv_a_p;
  }
  return c * spec.b * em.one_plus_inv_sum_p * std::pow(static_cast<double>(n), p - 1) * geo;
}

BoundValue l_rho_moment_bound(const EnvSpec& spec, int p, int eps, double alpha, const SeriesOptions& opt) {
  if (p < 1 || eps < 1) return BoundValue::inapplicable("need integer p >= 1 and eps >= 1");
  if (!(alpha < 1.0)) return BoundValue::inapplicable("extinction probability is not below 1");
  if (spec.model == ModelKind::orrw) {
    if (!(spec.delta > 1.0)) return BoundValue::inapplicable("geometric domination of L(rho) needs delta > 1");
    if (p > opt.cap) return BoundValue::inapplicable("moment order exceeds the geometric table cap");
    const double q0 = (1.0 - alpha) * spec.b / (spec.b + spec.delta);
    return BoundValue::ok(geometric_moment(p, q0, opt.cap));
  }
  const int order = p + eps;
  if (order > opt.cap) return BoundValue::inapplicable("theta order exceeds the geometric table cap");
  const double q = 1.0 + static_cast<double>(eps) / p;
  const double qp = 1.0 + static_cast<double>(p) / eps;
  const double b = spec.b;
  double sum = std::pow(theta(spec, order, 1, opt.cap), 1.0 / q);
  const double log_alpha = alpha > 0.0 ? std::log(alpha) : -kInf;
  for (int n = 2; n <= opt.max_terms; ++n) {
    const double y = std::exp(std::pow(b, n - 2) * log_alpha);
    if (y == 0.0) return BoundValue::ok(sum);
    const double survive = -std::expm1(b * std::log1p(-y));  // 1 - (1-y)^b
    const double term = std::pow(theta(spec, order, n, opt.cap), 1.0 / q) * std::pow(survive, 1.0 / qp);
    sum += term;
    if (!std::isfinite(sum)) return BoundValue::ok(kInf, "series overflow");
    if (term < opt.tol) return BoundValue::ok(sum);
  }
  return BoundValue::inapplicable("series did not reach the truncation tolerance");
}

SpeedBounds speed_bounds(const EnvSpec& spec, double alpha, const SeriesOptions& opt) {
  SpeedBounds s;
  const double b = spec.b;
  if (spec.model == ModelKind::rwre) {
    const BoundValue L = l_rho_moment_bound(spec, 1, 1, alpha, opt);
    if (L.applicable && std::isfinite(L.value) && L.value > 0.0) {
      s.theorem = BoundValue::ok((1.0 - alpha) / L.value);
    } else {
      s.theorem = BoundValue::inapplicable(L.applicable ? "local-time bound is not finite" : L.reason);
    }
    s.comparison = BoundValue::inapplicable("comparison bound is defined for ORRW");
    s.upper = BoundValue::inapplicable("upper speed bound is defined for ORRW");
    s.lower = s.theorem;
    return s;
  }
  const double d = spec.delta;
  if (!(d > 1.0)) {
    s.theorem = BoundValue::inapplicable("theorem bound needs delta > 1");
  } else if (!(alpha < 1.0)) {
    s.theorem = BoundValue::inapplicable("extinction probability is not below 1");
  } else {
    s.theorem = BoundValue::ok((1.0 - alpha) * (1.0 - alpha) * b / (b + d));
  }
  if (d < b) {
    s.comparison = BoundValue::ok((b - d) / (b + d));
  } else {
    s.comparison = BoundValue::inapplicable("comparison bound needs delta < b");
  }
  s.upper = BoundValue::ok(b / (b + d));
  if (s.theorem.applicable && s.comparison.applicable) {
    s.lower = s.theorem.value >= s.comparison.value ? s.theorem : s.comparison;
  } else if (s.theorem.applicable) {
    s.lower = s.theorem;
  } else if (s.comparison.applicable) {
    s.lower = s.comparison;
  } else {
    s.lower = BoundValue::inapplicable(s.theorem.reason + "; " + s.comparison.reason);
  }
  return s;
}

double ell1_tail_bound(int n, double gamma) {
  if (n < 1) throw DomainError("ell1_tail_bound needs n >= 1");
  if (!(gamma >= 0.0) || !(gamma < 1.0)) throw DomainError("ell1_tail_bound needs gamma in [0,1)");
  return std::pow(gamma, n - 1);
}

BoundValue ell1_second_moment_bound(double gamma, int psi, int zeta) {
  if (!(gamma >= 0.0) || !(gamma < 1.0)) return BoundValue::inapplicable("gamma is not below 1");
  const double s = static_cast<double>(psi) * zeta;
  const double g = 1.0 - gamma;
  return BoundValue::ok(s * s * (1.0 + 2.0 * gamma / (g * g) + 3.0 / g));
}

BoundValue pi_moment_bound(double p, double gamma, int psi, int zeta, double alpha, int cap) {
  if (!(p >= 0.0)) return BoundValue::inapplicable("moment order must be nonnegative");
  if (p == 0.0) return BoundValue::ok(1.0);
  const double r = std::ceil(p);
  if (r != p) {
    const BoundValue hi = pi_moment_bound(r, gamma, psi, zeta, alpha, cap);
    if (!hi.applicable) return hi;
    return BoundValue::ok(std::pow(hi.value, p / r), "Lyapunov from the next integer order");
  }
  const int n = static_cast<int>(p);
  if (2 * n > cap) return BoundValue::inapplicable("moment order exceeds the geometric table cap");
  if (!(alpha < 1.0)) return BoundValue::inapplicable("extinction probability is not below 1");
  if (!(gamma >= 0.0) || !(gamma < 1.0)) return BoundValue::inapplicable("gamma is not below 1");
  const int s = psi * zeta;
  const double m2 = std::sqrt(geometric_moment(2 * n, 1.0 - alpha, cap));
  if (gamma == 0.0) {
    if (s == 1) return BoundValue::ok((std::pow(2.0, n) - 1.0) * m2, "gamma = 0 limit");
    return BoundValue::ok(kInf, "bound diverges at gamma = 0");
  }
  const double lg = std::log(gamma) / (2.0 * s);
  const double u = std::exp(lg);
  const double one_minus_u = -std::expm1(lg);
  const double excess = geometric_moment_excess(n, u, cap);
  const double v = std::pow(gamma, -0.5) / one_minus_u * excess * m2;
  return BoundValue::ok(std::isfinite(v) ? v : kInf);
}

BoundValue tau1_moment_bound(const EnvSpec& spec, int p, int eps, double gamma, int psi, int zeta, double alpha,
                             const SeriesOptions& opt) {
  if (p < 1 || eps < 1) return BoundValue::inapplicable("need integer p >= 1 and eps >= 1");
  const double q = 1.0 + static_cast<double>(eps) / p;
  const double qp = 1.0 + static_cast<double>(p) / eps;
  const BoundValue L = l_rho_moment_bound(spec, p + eps, 1, alpha, opt);
  if (!L.applicable) return BoundValue::inapplicable("local-time moment: " + L.reason);
  const BoundValue P1 = pi_moment_bound(2.0 * (p - 1) * qp, gamma, psi, zeta, alpha, opt.cap);
  if (!P1.applicable) return BoundValue::inapplicable("Pi moment: " + P1.reason);
  const BoundValue P2 = pi_moment_bound(4.0 * qp, gamma, psi, zeta, alpha, opt.cap);
  if (!P2.applicable) return BoundValue::inapplicable("Pi moment: " + P2.reason);
  const double v = std::numbers::pi * std::numbers::pi / 6.0 * std::pow(L.value, 1.0 / q) *
                   std::pow(P1.value, 1.0 / (2.0 * qp)) * std::pow(P2.value, 1.0 / (2.0 * qp));
  return BoundValue::ok(std::isfinite(v) ? v : kInf);
}

int covariance_a(double w) {
  if (!(w > 0.0)) throw DomainError("covariance_a needs w > 0");
  int a = static_cast<int>(std::floor(3.0 / w)) + 1;
  if (a % 2 != 0) ++a;
  return a;
}

CovarianceBounds covariance_bounds(const EnvSpec& spec, double w, double alpha, double gamma, int psi, int zeta,
                                   const SeriesOptions& opt) {
  CovarianceBounds c;
  c.ell1_sq = ell1_second_moment_bound(gamma, psi, zeta);
  c.tau1_sq = tau1_moment_bound(spec, 2, 1, gamma, psi, zeta, alpha, opt);
  c.tau1_mean = tau1_moment_bound(spec, 1, 1, gamma, psi, zeta, alpha, opt);
  if (!(alpha < 1.0)) {
    c.upper = c.lower = c.event_prob = BoundValue::inapplicable("extinction probability is not below 1");
    return c;
  }
  if (c.ell1_sq.applicable && c.tau1_sq.applicable) {
    c.upper = BoundValue::ok((c.ell1_sq.value + c.tau1_sq.value) / (1.0 - alpha));
  } else {
    c.upper = BoundValue::inapplicable(!c.ell1_sq.applicable ? c.ell1_sq.reason : c.tau1_sq.reason);
  }
  if (!(w > 0.0) || !(w <= 1.0)) {
    c.lower = c.event_prob = BoundValue::inapplicable("no positive speed lower bound");
    return c;
  }
  c.a = covariance_a(w);
  const double h = c.a / 2.0;
  const double b = spec.b;
  if (spec.model == ModelKind::rwre) {
    double down = 0.0, back = 0.0;
    for (const auto& [a, prob] : enumerate_env(spec)) {
      const std::vector<double> tw = transition_weights_rwre(a);
      down += prob * std::pow(tw[1], h);
      back += prob * std::pow(tw[0], h - 1.0) * (1.0 - tw[0]);
    }
    c.event_prob = BoundValue::ok(b * down * back);
  } else {
    const double d = spec.delta;
    c.event_prob = BoundValue::ok(std::pow(b / (b + d), 2) * std::pow(d / (b + d), h - 1.0) *
                                  std::pow(d / (b - 1.0 + 2.0 * d), h - 1.0));
  }
  if (!c.tau1_mean.applicable) {
    c.lower = BoundValue::inapplicable(c.tau1_mean.reason);
  } else {
    c.lower = BoundValue::ok((1.0 - alpha) * c.event_prob.value / c.tau1_mean.value);
  }
  return c;
}

BoundsReport compute_bounds(const EnvSpec& spec, const BoundsParams& params) {
  spec.validate();
  BoundsReport r;
  r.env = spec;
  r.transience = transience_check(spec);
  SeriesOptions opt;
  opt.tol = params.series_tol;
  opt.cap = params.geom_cap;

  if (params.psi > 0) {
    r.selection.psi = params.psi;
    try {
      r.selection.m = mean_offspring(spec, params.psi);
      r.selection.ok = r.selection.m > 1.0;
      if (!r.selection.ok) r.selection.reason = "coloring process is not supercritical at the requested psi";
    } catch (const ConfigError& e) {
      // Decided by the sampled law below.
      r.selection.ok = true;
      r.selection.m = 0.0;
      r.selection.reason = e.what();
    }
  } else {
    r.selection = select_psi(spec, params.psi_max);
  }

  if (r.selection.ok) {
    const int psi = r.selection.psi;
    if (spec.model == ModelKind::rwre && psi == 1) {
      r.offspring = offspring_exact_rwre_psi1(spec);
    } else {
      OffspringMcOptions mo;
      mo.samples = params.offspring_samples;
      mo.seed = params.offspring_seed;
      mo.workers = params.workers;
      r.offspring = offspring_mc(spec, psi, mo);
    }
    r.branching = summarize(*r.offspring, spec.b);
    r.alpha_used = r.branching->alpha_hi;
    r.gamma_used = r.branching->gamma_hi;
  }

  if (spec.model == ModelKind::rwre) {
    r.env_moments_p = env_moments(spec, params.p + params.eps);
    for (int n = 1; n <= params.theta_terms; ++n) r.theta_table.push_back(theta(spec, params.p + params.eps, n, opt.cap));
  }

  const bool branching_ok = r.branching && r.branching->supercritical;
  const std::string no_branching =
      r.selection.ok ? "sampled coloring process is not supercritical" : r.selection.reason;
  r.l_rho = branching_ok ? l_rho_moment_bound(spec, params.p, params.eps, r.alpha_used, opt)
                         : BoundValue::inapplicable(no_branching);
  if (branching_ok) {
    r.speed = speed_bounds(spec, r.alpha_used, opt);
  } else {
    r.speed = speed_bounds(spec, 1.0, opt);
  }

  const bool gamma_ok = branching_ok && r.gamma_used < 1.0 && r.branching->zeta_hi > 0;
  if (gamma_ok) {
    const int psi = r.branching->psi;
    const int zeta = r.branching->zeta_hi;
    r.ell1_scale = psi * zeta;
    for (int n = 1; n <= params.tail_n_max; ++n) r.ell1_tail.push_back(ell1_tail_bound(n, r.gamma_used));
    r.pi_mean = pi_moment_bound(1.0, r.gamma_used, psi, zeta, r.alpha_used, opt.cap);
    r.tau1_mean = tau1_moment_bound(spec, params.p, params.eps, r.gamma_used, psi, zeta, r.alpha_used, opt);
    const double w = r.speed.lower.applicable ? r.speed.lower.value : 0.0;
    r.covariance = covariance_bounds(spec, w, r.alpha_used, r.gamma_used, psi, zeta, opt);
  } else {
    const std::string why = branching_ok ? "gamma is not below 1" : no_branching;
    r.pi_mean = r.tau1_mean = BoundValue::inapplicable(why);
    r.covariance.ell1_sq = r.covariance.tau1_sq = r.covariance.tau1_mean = BoundValue::inapplicable(why);
    r.covariance.event_prob = r.covariance.lower = r.covariance.upper = BoundValue::inapplicable(why);
  }

  if (!r.speed.lower.applicable) r.inapplicable.push_back("speed");
  if (!gamma_ok) r.inapplicable.push_back("ell1_tail");
  if (!r.tau1_mean.applicable) r.inapplicable.push_back("tau1");
  if (!r.covariance.lower.applicable || !r.covariance.upper.applicable) r.inapplicable.push_back("covariance");
  return r;
}

}  // namespace rwtree
