#include "rwtree/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "rwtree/error.hpp"

namespace rwtree {

void CampaignConfig::validate() const {
  if (replicas == 0) throw ConfigError("replicas must be positive", "/campaign/replicas");
  if (max_steps == 0) throw ConfigError("max_steps must be positive", "/campaign/max_steps");
  if (max_level < 0) throw ConfigError("max_level must be >= 0", "/campaign/max_level");
  if (guard < 1) throw ConfigError("guard must be >= 1", "/campaign/guard");
  if (beta_level < 1) throw ConfigError("beta_level must be >= 1", "/campaign/beta_level");
  if (max_level > 0 && beta_level > max_level) {
    throw ConfigError("beta_level must not exceed max_level", "/campaign/beta_level");
  }
  if (max_vertices < 2) throw ConfigError("max_vertices must be >= 2", "/campaign/max_vertices");
  for (int k : probe_levels) {
    if (k < 1) throw ConfigError("probe levels must be >= 1", "/campaign/probe_levels");
  }
}

std::string_view to_string(ReplicaStatus s) noexcept {
  switch (s) {
    case ReplicaStatus::ok:
      return "ok";
    case ReplicaStatus::step_cap:
      return "step_cap";
    case ReplicaStatus::memory_cap:
      return "memory_cap";
  }
  return "ok";
}

ReplicaStats run_replica(const EnvSpec& spec, const CampaignConfig& cfg, std::uint64_t index) {
  Walk::Options wo;
  wo.max_vertices = cfg.max_vertices;
  Walk walk(spec, SeedSpec{cfg.seed, index, Purpose::walk}, std::move(wo));
  RegenTracker tracker(cfg.guard);
  ReplicaStats r;
  r.index = index;
  bool reached = false;
  try {
    for (std::uint64_t n = 0; n < cfg.max_steps; ++n) {
      const StepEvent ev = walk.step();
      tracker.observe(ev);
      if (cfg.max_level > 0 && ev.to_level >= cfg.max_level) {
        reached = true;
        break;
      }
    }
  } catch (const MemoryCapExceeded&) {
    r.status = ReplicaStatus::memory_cap;
  }
  if (r.status == ReplicaStatus::ok && cfg.max_level > 0 && !reached) r.status = ReplicaStatus::step_cap;

  r.final_step = walk.time();
  r.final_level = walk.level();
  r.max_level = tracker.max_level();
  r.d_time = tracker.d_time();
  r.returned = r.d_time > 0;
  r.beta_hit_time = tracker.first_hit_time(cfg.beta_level + 1);

  RegenResult res = tracker.finalize();
  r.L_root = res.stats.L_root;
  r.confirmed = res.confirmed;
  r.censored = res.censored;
  r.censor_fraction = res.censor_fraction;
  std::int64_t last_confirmed = 0;
  for (std::size_t i = 0; i < res.blocks.size(); ++i) {
    const RegenBlock& blk = res.blocks[i];
    if (blk.censored) continue;
    last_confirmed = blk.ell_next;
    if (i == 0) {
      r.first_confirmed = true;
      r.ell1 = blk.ell_next;
      r.tau1 = blk.tau_next;
      r.pi_to_tau1 = res.stats.pi_to_tau1;
    } else {
      r.later.add(static_cast<double>(blk.d_ell()), static_cast<double>(blk.d_tau()));
    }
  }
  r.ell1_survives_to = r.first_confirmed ? r.ell1 : std::max<std::int64_t>(1, r.max_level - cfg.guard + 1);
  r.pi_probe.reserve(cfg.probe_levels.size());
  for (int k : cfg.probe_levels) {
    const bool settled = k < last_confirmed && static_cast<std::size_t>(k) < res.stats.pi_levels.size();
    r.pi_probe.push_back(settled ? res.stats.pi_levels[k] : 0);
  }
  if (cfg.keep_blocks) r.blocks = std::move(res.blocks);
  return r;
}

std::vector<ReplicaStats> run_campaign(const EnvSpec& spec, const CampaignConfig& cfg) {
  spec.validate();
  cfg.validate();
  std::vector<ReplicaStats> out(cfg.replicas);
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, cfg.workers), cfg.replicas));
  if (workers == 1) {
    for (std::uint64_t i = 0; i < cfg.replicas; ++i) out[i] = run_replica(spec, cfg, i);
    return out;
  }
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t i = next++; i < cfg.replicas; i = next++) out[i] = run_replica(spec, cfg, i);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

Proportion wilson(std::uint64_t k, std::uint64_t n, double z) {
  Proportion p;
  p.k = k;
  p.n = n;
  if (n == 0) {
    p.lo = 0.0;
    p.hi = 1.0;
    return p;
  }
  const double nn = static_cast<double>(n);
  p.p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p.p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p.p * (1.0 - p.p) / nn + z2 / (4.0 * nn * nn)) / denom;
  p.lo = k == 0 ? 0.0 : std::max(0.0, center - half);
  p.hi = k == n ? 1.0 : std::min(1.0, center + half);
  return p;
}

Estimate mean_estimate(const std::vector<double>& xs, double z) {
  Estimate e;
  e.n = xs.size();
  if (xs.empty()) return e;
  double s = 0.0;
  for (double x : xs) s += x;
  e.value = s / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.value) * (x - e.value);
    e.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  e.ok = xs.size() >= 2;
  e.lo = e.value - z * e.se;
  e.hi = e.value + z * e.se;
  return e;
}

namespace {

// Linearized standard error of a smooth function of replica means.
double linearized_se(const std::vector<double>& lin) {
  const std::size_t n = lin.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : lin) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : lin) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

Estimate finish(double value, double se, std::uint64_t n, bool ok, double z) {
  Estimate e;
  e.value = value;
  e.se = se;
  e.n = n;
  e.ok = ok;
  e.lo = value - z * se;
  e.hi = value + z * se;
  return e;
}

std::uint64_t total_blocks(const std::vector<ReplicaStats>& stats) {
  std::uint64_t n = 0;
  for (const auto& r : stats) n += r.later.n;
  return n;
}

}  // namespace

SpeedEstimate estimate_speed(const std::vector<ReplicaStats>& stats, double z) {
  SpeedEstimate s;
  std::vector<double> xs;
  for (const auto& r : stats) {
    if (r.final_step > 0) xs.push_back(static_cast<double>(r.final_level) / static_cast<double>(r.final_step));
  }
  s.global = mean_estimate(xs, z);

  double L = 0.0, T = 0.0;
  std::size_t n = 0;
  for (const auto& r : stats) {
    L += r.later.l;
    T += r.later.t;
    ++n;
  }
  if (T > 0.0 && n >= 2) {
    const double R = L / T;
    const double tbar = T / static_cast<double>(n);
    std::vector<double> lin;
    lin.reserve(n);
    for (const auto& r : stats) lin.push_back((r.later.l - R * r.later.t) / tbar);
    s.blocks = finish(R, linearized_se(lin), total_blocks(stats), true, z);
  }
  return s;
}

BetaInterval estimate_beta(const std::vector<ReplicaStats>& stats, int H, double z) {
  (void)H;  // encoded in beta_hit_time by the campaign
  BetaInterval b;
  for (const auto& r : stats) {
    if (r.final_step == 0) continue;
    ++b.n;
    const bool before = r.returned && (r.beta_hit_time == 0 || r.d_time < r.beta_hit_time);
    if (before) {
      ++b.returned;
    } else if (r.beta_hit_time == 0) {
      ++b.undecided;
    }
  }
  if (b.n > 0) {
    b.low = static_cast<double>(b.returned) / static_cast<double>(b.n);
    b.high = static_cast<double>(b.returned + b.undecided) / static_cast<double>(b.n);
  }
  b.high_ci = wilson(b.returned + b.undecided, b.n, z);
  return b;
}

std::vector<TailPoint> estimate_tail_ell1(const std::vector<ReplicaStats>& stats, std::int64_t scale, int n_max,
                                          double gamma, double z) {
  std::vector<TailPoint> out;
  for (int n = 1; n <= n_max; ++n) {
    TailPoint tp;
    tp.n = n;
    tp.level = n * scale;
    std::uint64_t k = 0, total = 0;
    for (const auto& r : stats) {
      if (r.final_step == 0) continue;
      ++total;
      const bool survives = r.first_confirmed ? r.ell1 >= tp.level : true;
      if (survives) ++k;
    }
    tp.survival = wilson(k, total, z);
    tp.bound = std::pow(gamma, n - 1);
    out.push_back(tp);
  }
  return out;
}

Estimate estimate_covariance_K(const std::vector<ReplicaStats>& stats, double z) {
  const std::size_t n = stats.size();
  const std::uint64_t blocks = total_blocks(stats);
  double m[5] = {0, 0, 0, 0, 0};
  for (const auto& r : stats) {
    m[0] += r.later.l;
    m[1] += r.later.t;
    m[2] += r.later.ll;
    m[3] += r.later.lt;
    m[4] += r.later.tt;
  }
  if (n < 2 || m[1] <= 0.0) return finish(0.0, 0.0, blocks, false, z);
  for (double& x : m) x /= static_cast<double>(n);
  const double v = m[0] / m[1];
  const double N = m[2] - 2.0 * v * m[3] + v * v * m[4];
  const double K = N / m[1];
  const double dNdv = -2.0 * m[3] + 2.0 * v * m[4];
  const double g[5] = {dNdv / (m[1] * m[1]), -dNdv * v / (m[1] * m[1]) - N / (m[1] * m[1]), 1.0 / m[1],
                       -2.0 * v / m[1], v * v / m[1]};
  std::vector<double> lin;
  lin.reserve(n);
  for (const auto& r : stats) {
    const double zr[5] = {r.later.l, r.later.t, r.later.ll, r.later.lt, r.later.tt};
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += g[i] * (zr[i] - m[i]);
    lin.push_back(s);
  }
  return finish(K, linearized_se(lin), blocks, blocks >= 30, z);
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
    case Verdict::inapplicable:
      return "inapplicable";
  }
  return "inconclusive";
}

const Check* VerificationReport::find(std::string_view name) const {
  for (const Check& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool VerificationReport::any_fail() const {
  return std::any_of(checks.begin(), checks.end(), [](const Check& c) { return c.verdict == Verdict::fail; });
}

namespace {

Check inapplicable_check(std::string name, std::string why) {
  Check c;
  c.name = std::move(name);
  c.verdict = Verdict::inapplicable;
  c.note = std::move(why);
  return c;
}

// Empirical quantity must not exceed `bound`.
Check upper_check(std::string name, double bound, const Estimate& e, std::string note = {}) {
  Check c;
  c.name = std::move(name);
  c.analytic = bound;
  c.estimate = e.value;
  c.ci_lo = e.lo;
  c.ci_hi = e.hi;
  c.note = std::move(note);
  if (!e.ok) {
    c.verdict = Verdict::inconclusive;
  } else {
    c.verdict = e.lo > bound ? Verdict::fail : Verdict::pass;
    c.strict = e.hi < bound;
  }
  return c;
}

// Empirical quantity must not fall below `bound`.
Check lower_check(std::string name, double bound, const Estimate& e, std::string note = {}) {
  Check c;
  c.name = std::move(name);
  c.analytic = bound;
  c.estimate = e.value;
  c.ci_lo = e.lo;
  c.ci_hi = e.hi;
  c.note = std::move(note);
  if (!e.ok) {
    c.verdict = Verdict::inconclusive;
  } else {
    c.verdict = e.hi < bound ? Verdict::fail : Verdict::pass;
    c.strict = e.lo > bound;
  }
  return c;
}

// P(X >= j) <= base^(j-1) for every j, from per-replica samples.
Check domination_check(std::string name, const std::vector<std::uint64_t>& xs, double base, double z) {
  Check c;
  c.name = std::move(name);
  c.analytic = base;
  if (xs.size() < 30) {
    c.verdict = Verdict::inconclusive;
    c.note = "fewer than 30 samples";
    return c;
  }
  const std::uint64_t jmax = *std::max_element(xs.begin(), xs.end());
  c.verdict = Verdict::pass;
  c.strict = true;
  double worst = -1.0;
  std::uint64_t worst_j = 1;
  for (std::uint64_t j = 2; j <= jmax + 1; ++j) {
    const std::uint64_t k =
        static_cast<std::uint64_t>(std::count_if(xs.begin(), xs.end(), [&](std::uint64_t x) { return x >= j; }));
    const Proportion p = wilson(k, xs.size(), z);
    const double bound = std::pow(base, static_cast<double>(j - 1));
    if (p.lo > bound) c.verdict = Verdict::fail;
    if (p.hi >= bound) c.strict = false;
    if (p.lo - bound > worst) {
      worst = p.lo - bound;
      worst_j = j;
      c.estimate = p.p;
      c.ci_lo = p.lo;
      c.ci_hi = p.hi;
    }
  }
  std::ostringstream os;
  os << "worst level j = " << worst_j << ", n = " << xs.size();
  c.note = os.str();
  return c;
}

}  // namespace

VerificationReport verify(const EnvSpec& spec, const BoundsReport& bounds, const std::vector<ReplicaStats>& stats,
                          const CampaignConfig& cfg, const VerifyOptions& opt) {
  VerificationReport rep;
  const double z = opt.z;
  rep.replicas = stats.size();
  rep.transience = bounds.transience.verdict;
  std::uint64_t conf = 0, cens = 0;
  for (const auto& r : stats) {
    conf += r.confirmed;
    cens += r.censored;
    if (r.status == ReplicaStatus::memory_cap) ++rep.memory_cap_hits;
    if (r.status == ReplicaStatus::step_cap) ++rep.step_cap_hits;
  }
  rep.censor_fraction = conf + cens == 0 ? 1.0 : static_cast<double>(cens) / static_cast<double>(conf + cens);
  rep.speed = estimate_speed(stats, z);
  rep.beta = estimate_beta(stats, cfg.beta_level, z);
  rep.K = estimate_covariance_K(stats, z);

  const bool recurrent = bounds.transience.verdict != Transience::transient;
  const std::string recurrent_note = "environment is not in the transient regime";
  const bool have_branching = bounds.branching && bounds.branching->supercritical;
  const double alpha = bounds.alpha_used;

  // Speed.
  if (recurrent) {
    rep.checks.push_back(inapplicable_check("speed_lower", recurrent_note));
    rep.checks.push_back(inapplicable_check("speed_upper", recurrent_note));
    rep.checks.push_back(inapplicable_check("speed_consistency", recurrent_note));
  } else {
    if (bounds.speed.lower.applicable) {
      rep.checks.push_back(lower_check("speed_lower", bounds.speed.lower.value, rep.speed.global));
    } else {
      rep.checks.push_back(inapplicable_check("speed_lower", bounds.speed.lower.reason));
    }
    const double upper = bounds.speed.upper.applicable ? bounds.speed.upper.value : 1.0;
    rep.checks.push_back(upper_check("speed_upper", upper, rep.speed.global,
                                     bounds.speed.upper.applicable ? "" : "trivial bound v <= 1"));
    Check c;
    c.name = "speed_consistency";
    c.estimate = rep.speed.global.value;
    c.analytic = rep.speed.blocks.value;
    if (!rep.speed.global.ok || !rep.speed.blocks.ok) {
      c.verdict = Verdict::inconclusive;
      c.note = "not enough data for both estimators";
    } else {
      const double width = z * std::hypot(rep.speed.global.se, rep.speed.blocks.se);
      const double diff = std::abs(rep.speed.global.value - rep.speed.blocks.value);
      c.ci_lo = -2.0 * width;
      c.ci_hi = 2.0 * width;
      c.verdict = diff <= 2.0 * width ? Verdict::pass : Verdict::fail;
      c.strict = diff <= width;
      c.note = "global minus block estimate within two combined interval widths";
    }
    rep.checks.push_back(c);
  }

  // Return probability.
  if (have_branching) {
    Check c;
    c.name = "beta_le_alpha";
    c.analytic = alpha;
    c.estimate = rep.beta.high;
    c.ci_lo = rep.beta.high_ci.lo;
    c.ci_hi = rep.beta.high_ci.hi;
    c.verdict = rep.beta.high_ci.lo > alpha ? Verdict::fail : Verdict::pass;
    c.strict = rep.beta.high_ci.hi < alpha;
    std::ostringstream os;
    os << "beta in [" << rep.beta.low << ", " << rep.beta.high << "], H = " << cfg.beta_level;
    c.note = os.str();
    if (rep.beta.n < 30) c.verdict = Verdict::inconclusive;
    rep.checks.push_back(c);
  } else {
    rep.checks.push_back(inapplicable_check("beta_le_alpha", "no supercritical coloring process"));
  }

  // Level counts.
  if (have_branching) {
    std::vector<std::uint64_t> pis;
    for (std::size_t i = 0; i < cfg.probe_levels.size(); ++i) {
      for (const auto& r : stats) {
        if (i < r.pi_probe.size() && r.pi_probe[i] > 0) pis.push_back(r.pi_probe[i]);
      }
    }
    Check c = domination_check("pi_k_geometric_domination", pis, alpha, z);
    c.note += " (pooled over probe levels)";
    rep.checks.push_back(c);
  } else {
    rep.checks.push_back(inapplicable_check("pi_k_geometric_domination", "no supercritical coloring process"));
  }

  // Local time at the root.
  if (spec.model == ModelKind::orrw) {
    if (spec.delta > 1.0 && alpha < 1.0) {
      std::vector<std::uint64_t> Ls;
      for (const auto& r : stats) {
        if (r.final_step > 0) Ls.push_back(r.L_root);
      }
      const double q0 = (1.0 - alpha) * spec.b / (spec.b + spec.delta);
      rep.checks.push_back(domination_check("l_root_geometric_domination", Ls, 1.0 - q0, z));
    } else {
      rep.checks.push_back(inapplicable_check("l_root_geometric_domination", "needs delta > 1 and alpha < 1"));
    }
  }

  if (recurrent) {
    rep.checks.push_back(inapplicable_check("speed_times_local_time", recurrent_note));
  } else {
    std::vector<double> vs, ls;
    for (const auto& r : stats) {
      if (r.final_step == 0) continue;
      vs.push_back(static_cast<double>(r.final_level) / static_cast<double>(r.final_step));
      ls.push_back(static_cast<double>(r.L_root));
    }
    const Estimate ev = mean_estimate(vs, z), el = mean_estimate(ls, z);
    std::vector<double> lin;
    for (std::size_t i = 0; i < vs.size(); ++i) lin.push_back(el.value * (vs[i] - ev.value) + ev.value * (ls[i] - el.value));
    const Estimate prod = finish(ev.value * el.value, linearized_se(lin), vs.size(), vs.size() >= 2, z);
    const double bound = 1.0 - rep.beta.high_ci.hi;
    rep.checks.push_back(lower_check("speed_times_local_time", bound, prod,
                                     "v * E[L(rho)] against 1 - beta_high at its upper interval end"));
  }

  // Regeneration level tail.
  const double gamma = bounds.gamma_used * opt.gamma_scale;
  if (have_branching && bounds.ell1_scale > 0 && bounds.gamma_used < 1.0) {
    rep.tail = estimate_tail_ell1(stats, bounds.ell1_scale, opt.tail_n_max, gamma, z);
    Check c;
    c.name = "ell1_tail";
    c.analytic = gamma;
    std::uint64_t total = rep.tail.empty() ? 0 : rep.tail.front().survival.n;
    if (total < 30) {
      c.verdict = Verdict::inconclusive;
      c.note = "fewer than 30 replicas";
    } else {
      c.verdict = Verdict::pass;
      c.strict = true;
      for (const TailPoint& tp : rep.tail) {
        if (tp.survival.lo > tp.bound) c.verdict = Verdict::fail;
        if (tp.survival.hi >= tp.bound && tp.n > 1) c.strict = false;
      }
      std::ostringstream os;
      os << "scale psi*zeta = " << bounds.ell1_scale;
      if (opt.gamma_scale != 1.0) os << ", gamma multiplied by " << opt.gamma_scale;
      c.note = os.str();
    }
    rep.checks.push_back(c);
  } else {
    rep.checks.push_back(inapplicable_check("ell1_tail", "gamma is not available"));
  }

  {
    Check c;
    c.name = "censor_fraction";
    c.analytic = 0.01;
    c.estimate = rep.censor_fraction;
    c.verdict = conf + cens == 0 ? Verdict::inconclusive
                                 : (rep.censor_fraction < 0.01 ? Verdict::pass : Verdict::fail);
    c.strict = c.verdict == Verdict::pass;
    rep.checks.push_back(c);
  }

  // First-block moments against their bounds.
  std::vector<double> l2, t1, t2, pi;
  for (const auto& r : stats) {
    if (!r.first_confirmed) continue;
    l2.push_back(static_cast<double>(r.ell1) * static_cast<double>(r.ell1));
    t1.push_back(static_cast<double>(r.tau1));
    t2.push_back(static_cast<double>(r.tau1) * static_cast<double>(r.tau1));
    pi.push_back(static_cast<double>(r.pi_to_tau1));
  }
  const std::string first_note = "over replicas with a confirmed first block";
  auto moment_check = [&](const std::string& name, const BoundValue& bv, const std::vector<double>& xs) {
    if (!bv.applicable) {
      rep.checks.push_back(inapplicable_check(name, bv.reason));
    } else {
      rep.checks.push_back(upper_check(name, bv.value, mean_estimate(xs, z), first_note));
    }
  };
  moment_check("ell1_second_moment", bounds.covariance.ell1_sq, l2);
  moment_check("tau1_mean", bounds.tau1_mean, t1);
  moment_check("tau1_second_moment", bounds.covariance.tau1_sq, t2);
  moment_check("pi_mean", bounds.pi_mean, pi);

  // Covariance parameter.
  if (recurrent) {
    rep.checks.push_back(inapplicable_check("covariance_K", recurrent_note));
  } else if (!bounds.covariance.lower.applicable || !bounds.covariance.upper.applicable) {
    rep.checks.push_back(inapplicable_check("covariance_K", !bounds.covariance.lower.applicable
                                                                 ? bounds.covariance.lower.reason
                                                                 : bounds.covariance.upper.reason));
  } else {
    Check c;
    c.name = "covariance_K";
    c.analytic = bounds.covariance.lower.value;
    c.analytic_hi = bounds.covariance.upper.value;
    c.estimate = rep.K.value;
    c.ci_lo = rep.K.lo;
    c.ci_hi = rep.K.hi;
    if (!rep.K.ok) {
      c.verdict = Verdict::inconclusive;
      c.note = "fewer than 30 uncensored blocks";
    } else {
      const bool bad = rep.K.hi < bounds.covariance.lower.value || rep.K.lo > bounds.covariance.upper.value;
      c.verdict = bad ? Verdict::fail : Verdict::pass;
      c.strict = rep.K.lo > bounds.covariance.lower.value && rep.K.hi < bounds.covariance.upper.value;
      c.note = "first blocks discarded; later blocks pooled";
    }
    rep.checks.push_back(c);
  }

  // Sampled offspring mean against the exact mean.
  if (bounds.offspring && bounds.offspring->provenance == Provenance::monte_carlo) {
    const OffspringDist& d = *bounds.offspring;
    double m = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < d.probs.size(); ++k) {
      m += k * d.probs[k];
      m2 += static_cast<double>(k * k) * d.probs[k];
    }
    const double se = std::sqrt(std::max(0.0, m2 - m * m) / static_cast<double>(d.samples));
    Check c;
    c.name = "offspring_mean";
    c.estimate = m;
    c.ci_lo = m - z * se;
    c.ci_hi = m + z * se;
    try {
      const double exact = mean_offspring(spec, d.psi);
      c.analytic = exact;
      c.verdict = std::abs(m - exact) <= z * se ? Verdict::pass : Verdict::fail;
      c.strict = c.verdict == Verdict::pass;
    } catch (const ConfigError& e) {
      c.verdict = Verdict::inconclusive;
      c.note = e.what();
    }
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace rwtree
