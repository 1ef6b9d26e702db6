#include "rwtree/branching.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rwtree/error.hpp"

namespace rwtree {

std::string_view to_string(Provenance p) noexcept { return p == Provenance::exact ? "exact" : "monte_carlo"; }

double OffspringDist::mean() const noexcept { return pgf_mean(probs); }

namespace {

std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > (std::uint64_t{1} << 62) / base) throw ConfigError("b^psi is too large", "/psi");
    r *= base;
  }
  return r;
}

}  // namespace

OffspringDist offspring_exact_rwre_psi1(const EnvSpec& spec) {
  spec.validate();
  if (spec.model != ModelKind::rwre) throw Unsupported("exact offspring law is available for RWRE only");
  if (spec.b > 16) throw Unsupported("exact offspring law needs b <= 16");
  const int b = spec.b;
  const unsigned full = (1u << b) - 1;
  OffspringDist d;
  d.psi = 1;
  d.provenance = Provenance::exact;
  d.probs.assign(static_cast<std::size_t>(b) + 1, 0.0);
  for (const auto& [a, prob] : enumerate_env(spec)) {
    const std::vector<double> w = transition_weights_rwre(a);
    for (unsigned S = 0; S <= full; ++S) {
      double out = w[0];
      for (int j = 0; j < b; ++j) {
        if (!(S >> j & 1u)) out += w[j + 1];
      }
      // Inclusion-exclusion over R subset of S.
      double p = 0.0;
      for (unsigned R = S;; R = (R - 1) & S) {
        double denom = out;
        int sz = 0;
        for (int j = 0; j < b; ++j) {
          if (R >> j & 1u) {
            denom += w[j + 1];
            ++sz;
          }
        }
        p += (sz % 2 == 0 ? 1.0 : -1.0) * w[0] / denom;
        if (R == 0) break;
      }
      d.probs[static_cast<std::size_t>(__builtin_popcount(S))] += prob * p;
    }
  }
  return d;
}

double ray_hit_prob_rwre(std::span<const double> ray_a) {
  double sum = 1.0, prod = 1.0;
  for (double a : ray_a) {
    if (!(a > 0.0)) throw DomainError("ray environment must be positive");
    prod /= a;
    sum += prod;
  }
  return 1.0 / sum;
}

double ray_hit_prob_orrw(int psi, double delta) {
  if (psi < 1 || !(delta > 0.0)) throw DomainError("ray_hit_prob_orrw: need psi >= 1 and delta > 0");
  double p = 1.0;
  for (int j = 1; j <= psi; ++j) p *= j / (j + delta);
  return p;
}

namespace {

// One sample of the coloring offspring count.
class RaySampler {
 public:
  RaySampler(const EnvSpec& spec, int psi, std::uint64_t cap) : spec_(spec), psi_(psi), cap_(cap) {
    const std::size_t n = static_cast<std::size_t>(psi) + 1;
    key_.resize(n);
    slot_.resize(n);
    wp_.resize(n);
    wc_.resize(n);
    crossed_.resize(n + 1);
    used_.resize(2 * n);
    epoch_.resize(2 * n);
    init_.resize(n);
  }

  // Returns the number of colored level-psi vertices.
  int sample(const SeedSpec& seed, std::uint64_t& cap_hits) {
    const ClockSource clocks(seed);
    const ClockSource env(env_seed_for(seed));
    const std::uint64_t rays = ipow(static_cast<std::uint64_t>(spec_.b), psi_);
    int colored = 0;
    for (std::uint64_t r = 0; r < rays; ++r) {
      std::uint64_t rem = r;
      for (int i = psi_ - 1; i >= 0; --i) {
        slot_[i] = static_cast<int>(rem % spec_.b) + 1;
        rem /= spec_.b;
      }
      key_[0] = kRootKey;
      for (int i = 0; i < psi_; ++i) key_[i + 1] = child_key(key_[i], slot_[i]);
      if (spec_.model == ModelKind::rwre) {
        for (int i = 0; i < psi_; ++i) {
          const EnvVector a = sample_env(key_[i], spec_, env);
          const std::vector<double> w = transition_weights_rwre(a);
          wp_[i] = w[0];
          wc_[i] = w[slot_[i]];
        }
      }
      const int res = run_ray(clocks);
      if (res > 0) ++colored;
      if (res < 0) ++cap_hits;
    }
    return colored;
  }

 private:
  double rate(int i, int which) const {
    if (spec_.model == ModelKind::rwre) return which == 0 ? wp_[i] : wc_[i];
    return crossed_[which == 0 ? i : i + 1] ? spec_.delta : 1.0;
  }

  // +1 hit the level-psi vertex, 0 hit the root parent, -1 step cap.
  int run_ray(const ClockSource& clocks) {
    std::fill(crossed_.begin(), crossed_.end(), 0);
    crossed_[0] = 1;
    std::fill(init_.begin(), init_.end(), 0);
    int i = 0;
    for (std::uint64_t steps = 0; steps < cap_; ++steps) {
      const std::uint32_t cslot = static_cast<std::uint32_t>(slot_[i]);
      double* ep = &epoch_[2 * static_cast<std::size_t>(i)];
      std::uint32_t* us = &used_[2 * static_cast<std::size_t>(i)];
      if (!init_[i]) {
        init_[i] = 1;
        us[0] = us[1] = 1;
        ep[0] = clocks.clock(key_[i], kParentSlot, 1) / rate(i, 0);
        ep[1] = clocks.clock(key_[i], cslot, 1) / rate(i, 1);
      }
      const int win = ep[1] < ep[0] ? 1 : 0;
      crossed_[win == 0 ? i : i + 1] = 1;
      const std::uint32_t k = ++us[win];
      ep[win] += clocks.clock(key_[i], win == 0 ? kParentSlot : cslot, k) / rate(i, win);
      i += win == 0 ? -1 : 1;
      if (i < 0) return 0;
      if (i == psi_) return 1;
    }
    return -1;
  }

  const EnvSpec& spec_;
  int psi_;
  std::uint64_t cap_;
  std::vector<VertexKey> key_;
  std::vector<int> slot_;
  std::vector<double> wp_, wc_;
  std::vector<std::uint8_t> crossed_;
  std::vector<std::uint32_t> used_;
  std::vector<double> epoch_;
  std::vector<std::uint8_t> init_;
};

}  // namespace

OffspringDist offspring_mc(const EnvSpec& spec, int psi, const OffspringMcOptions& opt) {
  spec.validate();
  if (psi < 1) throw DomainError("offspring_mc: psi must be >= 1");
  if (opt.samples < 1000) throw DomainError("offspring_mc: at least 1000 samples are required");
  const std::uint64_t rays = ipow(static_cast<std::uint64_t>(spec.b), psi);
  if (rays > (1u << 20)) throw ConfigError("b^psi exceeds the ray limit", "/psi");
  const unsigned workers = std::max(1u, opt.workers);
  std::vector<std::vector<std::uint64_t>> counts(workers, std::vector<std::uint64_t>(rays + 1, 0));
  std::vector<std::uint64_t> caps(workers, 0);
  auto work = [&](unsigned w) {
    RaySampler sampler(spec, psi, opt.ray_step_cap);
    for (std::uint64_t s = w; s < opt.samples; s += workers) {
      const int c = sampler.sample(SeedSpec{opt.seed, s, Purpose::offspring_mc}, caps[w]);
      ++counts[w][static_cast<std::size_t>(c)];
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  OffspringDist d;
  d.psi = psi;
  d.provenance = Provenance::monte_carlo;
  d.samples = opt.samples;
  d.probs.assign(rays + 1, 0.0);
  d.std_errors.assign(rays + 1, 0.0);
  const double n = static_cast<double>(opt.samples);
  for (std::size_t k = 0; k <= rays; ++k) {
    std::uint64_t c = 0;
    for (unsigned w = 0; w < workers; ++w) c += counts[w][k];
    const double p = static_cast<double>(c) / n;
    d.probs[k] = p;
    // Floored so that unobserved entries still get a rule-of-three width.
    d.std_errors[k] = std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
  }
  for (unsigned w = 0; w < workers; ++w) d.cap_hits += caps[w];
  return d;
}

double mean_offspring(const EnvSpec& spec, int psi, std::uint64_t enumeration_cap) {
  spec.validate();
  if (psi < 1) throw DomainError("mean_offspring: psi must be >= 1");
  const double bpsi = std::pow(static_cast<double>(spec.b), psi);
  if (spec.model == ModelKind::orrw) return bpsi * ray_hit_prob_orrw(psi, spec.delta);
  const std::size_t k = spec.support.size();
  double combos = std::pow(static_cast<double>(k), psi);
  if (combos > static_cast<double>(enumeration_cap)) {
    throw ConfigError("support^psi exceeds the enumeration cap", "/psi");
  }
  std::vector<std::size_t> idx(static_cast<std::size_t>(psi), 0);
  std::vector<double> a(static_cast<std::size_t>(psi));
  double m = 0.0;
  for (;;) {
    double p = 1.0;
    for (int i = 0; i < psi; ++i) {
      a[i] = spec.support[idx[i]].value;
      p *= spec.support[idx[i]].prob;
    }
    m += p * ray_hit_prob_rwre(a);
    int i = 0;
    while (i < psi && ++idx[i] == k) idx[i++] = 0;
    if (i == psi) break;
  }
  return bpsi * m;
}

PsiSelection select_psi(const EnvSpec& spec, int psi_max, double margin) {
  PsiSelection sel;
  for (int psi = 1; psi <= psi_max; ++psi) {
    double m;
    try {
      m = mean_offspring(spec, psi);
    } catch (const ConfigError& e) {
      sel.reason = std::string("mean offspring not computable: ") + e.what();
      return sel;
    }
    if (m > 1.0 + margin) {
      sel.ok = true;
      sel.psi = psi;
      sel.m = m;
      return sel;
    }
    sel.m = m;
  }
  sel.reason = "no psi <= psi_max gives a supercritical coloring process";
  return sel;
}

double pgf(std::span<const double> probs, double x) noexcept {
  double s = 0.0;
  for (std::size_t k = probs.size(); k-- > 0;) s = s * x + probs[k];
  return s;
}

double pgf_mean(std::span<const double> probs) noexcept {
  double m = 0.0;
  for (std::size_t k = 1; k < probs.size(); ++k) m += static_cast<double>(k) * probs[k];
  return m;
}

std::vector<double> pruned(std::span<const double> probs) {
  if (probs.size() < 2) throw UsageError("pruned: need at least two entries");
  std::vector<double> q(probs.size() - 1);
  q[0] = probs[0] + probs[1];
  for (std::size_t k = 1; k < q.size(); ++k) q[k] = probs[k + 1];
  return q;
}

double smallest_fixed_point(const std::function<double(double)>& F) {
  double x = 0.0;
  for (int it = 0; it < 1'000'000; ++it) {
    const double nx = F(x);
    const double inc = nx - x;
    x = std::max(x, nx);
    if (inc < 1e-12) break;
  }
  if (F(x) - x <= 0.0) return x;
  // Bracket the root from above, then bisect.
  double lo = x, hi = 1.0;
  bool found = false;
  for (double d = 1e-12; x + d < 1.0; d *= 2.0) {
    const double t = x + d;
    const double h = F(t) - t;
    if (h == 0.0) return t;
    if (h < 0.0) {
      hi = t;
      found = true;
      break;
    }
    lo = t;
  }
  if (!found) return 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) - mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double extinction_probability(std::span<const double> probs) {
  if (probs.empty()) throw UsageError("extinction_probability: empty distribution");
  if (pgf_mean(probs) <= 1.0) return 1.0;
  return smallest_fixed_point([&](double x) { return pgf(probs, x); });
}

int zeta_horizon(double m) {
  if (!(m > 1.0)) throw DomainError("zeta_horizon: need m > 1");
  double v = m - 1.0;
  for (int zeta = 1; zeta < 1'000'000; ++zeta) {
    if (v > 1.0) return zeta;
    v *= m;
  }
  throw DomainError("zeta_horizon: m too close to 1");
}

double gamma_root(std::span<const double> probs, int zeta) {
  const double m = pgf_mean(probs);
  if (!(m > 1.0) || zeta < 1 || !(std::pow(m, zeta - 1) * (m - 1.0) > 1.0)) {
    throw DomainError("gamma_root: need m > 1 and m^(zeta-1)(m-1) > 1");
  }
  const std::vector<double> q = pruned(probs);
  auto F = [&](double x) {
    double y = pgf(q, x);
    for (int j = 1; j < zeta; ++j) y = pgf(probs, y);
    return y;
  };
  return smallest_fixed_point(F);
}

std::vector<double> stochastic_extreme(std::span<const double> probs, std::span<const double> std_errors, double z,
                                       bool smallest) {
  if (probs.size() != std_errors.size()) throw UsageError("stochastic_extreme: size mismatch");
  const std::size_t n = probs.size();
  std::vector<double> lo(n), hi(n);
  double rem = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    lo[k] = std::max(0.0, probs[k] - z * std_errors[k]);
    hi[k] = std::min(1.0, probs[k] + z * std_errors[k]);
    rem -= lo[k];
  }
  std::vector<double> out = lo;
  for (std::size_t j = 0; j < n && rem > 0.0; ++j) {
    const std::size_t k = smallest ? j : n - 1 - j;
    const double add = std::min(hi[k] - lo[k], rem);
    out[k] += add;
    rem -= add;
  }
  return out;
}

BranchingSummary summarize(const OffspringDist& dist, int b, double z) {
  BranchingSummary s;
  s.psi = dist.psi;
  s.b = b;
  s.m = dist.mean();
  s.alpha = extinction_probability(dist.probs);
  s.supercritical = s.m > 1.0;
  if (s.supercritical) {
    s.zeta = zeta_horizon(s.m);
    s.gamma = gamma_root(dist.probs, s.zeta);
    s.gamma_ok = s.gamma < 1.0;
    s.vartheta = std::pow(static_cast<double>(b), static_cast<double>((s.zeta - 1) * dist.psi)) *
                 (std::pow(static_cast<double>(b), dist.psi) - 1.0);
  } else {
    s.note = "coloring process is not supercritical";
  }
  if (dist.provenance == Provenance::monte_carlo && !dist.std_errors.empty()) {
    s.has_interval = true;
    const std::vector<double> low = stochastic_extreme(dist.probs, dist.std_errors, z, true);
    const std::vector<double> high = stochastic_extreme(dist.probs, dist.std_errors, z, false);
    s.alpha_hi = extinction_probability(low);
    s.alpha_lo = extinction_probability(high);
    auto gamma_at = [](const std::vector<double>& p, int& zeta) {
      const double m = pgf_mean(p);
      zeta = 0;
      if (!(m > 1.0)) return 1.0;
      try {
        zeta = zeta_horizon(m);
      } catch (const DomainError&) {
        return 1.0;
      }
      return gamma_root(p, zeta);
    };
    int zeta_lo = 0;
    s.gamma_hi = gamma_at(low, s.zeta_hi);
    s.gamma_lo = gamma_at(high, zeta_lo);
  } else {
    s.alpha_lo = s.alpha_hi = s.alpha;
    s.gamma_lo = s.gamma_hi = s.gamma;
    s.zeta_hi = s.zeta;
  }
  return s;
}

}  // namespace rwtree
