#pragma once

// Monte Carlo campaigns over independent replicas, estimators with
// confidence intervals, and the verification of every estimate against its
// analytic bound.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwtree/bounds.hpp"
#include "rwtree/model.hpp"
#include "rwtree/regen.hpp"

namespace rwtree {

inline constexpr double kZ = 3.0;

struct CampaignConfig {
  std::uint64_t replicas = 200;
  std::uint64_t max_steps = 1'000'000;
  int max_level = 0;  // 0: run every replica for max_steps
  int guard = 32;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  int beta_level = 64;  // H of the return-probability estimate
  std::size_t max_vertices = 20'000'000;
  std::vector<int> probe_levels = {1, 2, 3, 5, 10, 20, 50, 100};
  bool keep_blocks = false;

  void validate() const;  // throws ConfigError
};

enum class ReplicaStatus { ok, step_cap, memory_cap };
std::string_view to_string(ReplicaStatus s) noexcept;

// Sums over a replica's uncensored blocks after the first.
struct BlockSums {
  std::uint64_t n = 0;
  double l = 0, t = 0, ll = 0, lt = 0, tt = 0;

  void add(double dl, double dt) noexcept {
    ++n;
    l += dl;
    t += dt;
    ll += dl * dl;
    lt += dl * dt;
    tt += dt * dt;
  }
};

struct ReplicaStats {
  std::uint64_t index = 0;
  ReplicaStatus status = ReplicaStatus::ok;
  std::uint64_t final_step = 0;
  int final_level = 0;
  int max_level = 0;
  std::uint64_t L_root = 0;
  bool returned = false;             // the walk stepped into the root parent
  std::uint64_t d_time = 0;          // first such step, 0 if none
  std::uint64_t beta_hit_time = 0;   // first hitting time of level H+1, 0 if none
  bool first_confirmed = false;
  std::int64_t ell1 = 0;             // first regeneration level (if confirmed)
  std::uint64_t tau1 = 0;
  std::uint64_t pi_to_tau1 = 0;
  std::int64_t ell1_survives_to = 0;  // l_1 >= this level is known
  BlockSums later;
  std::size_t confirmed = 0;
  std::size_t censored = 0;
  double censor_fraction = 1.0;
  std::vector<std::uint32_t> pi_probe;  // per probe level; 0 when not settled
  std::vector<RegenBlock> blocks;       // only with keep_blocks
};

ReplicaStats run_replica(const EnvSpec& spec, const CampaignConfig& cfg, std::uint64_t index);

// Replica i uses SeedSpec{seed, i, walk}; results are in index order and do
// not depend on the worker count.
std::vector<ReplicaStats> run_campaign(const EnvSpec& spec, const CampaignConfig& cfg);

struct Estimate {
  bool ok = false;
  double value = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t n = 0;
};

struct Proportion {
  std::uint64_t k = 0;
  std::uint64_t n = 0;
  double p = 0.0;
  double lo = 0.0;  // Wilson interval at z
  double hi = 0.0;
};

Proportion wilson(std::uint64_t k, std::uint64_t n, double z = kZ);

// Mean over replicas with a normal interval.
Estimate mean_estimate(const std::vector<double>& xs, double z = kZ);

struct SpeedEstimate {
  Estimate global;  // mean of final_level / final_step
  Estimate blocks;  // sum dl / sum dt over later blocks, delta method over replicas
};

SpeedEstimate estimate_speed(const std::vector<ReplicaStats>& stats, double z = kZ);

struct BetaInterval {
  std::uint64_t n = 0;
  std::uint64_t returned = 0;
  std::uint64_t undecided = 0;
  double low = 0.0;
  double high = 0.0;
  Proportion high_ci;  // Wilson interval of the upper end
};

BetaInterval estimate_beta(const std::vector<ReplicaStats>& stats, int H, double z = kZ);

struct TailPoint {
  int n = 0;
  std::int64_t level = 0;
  Proportion survival;
  double bound = 1.0;
};

// Empirical P(l_1 >= n * scale), n = 1..n_max. A replica whose first block
// is censored counts as a survivor at every level beyond what it settles.
std::vector<TailPoint> estimate_tail_ell1(const std::vector<ReplicaStats>& stats, std::int64_t scale, int n_max,
                                          double gamma, double z = kZ);

// K = E[(dl - v dt)^2] / E[dt] over later blocks with v = E[dl]/E[dt].
Estimate estimate_covariance_K(const std::vector<ReplicaStats>& stats, double z = kZ);

enum class Verdict { pass, fail, inconclusive, inapplicable };
std::string_view to_string(Verdict v) noexcept;

struct Check {
  std::string name;
  Verdict verdict = Verdict::inconclusive;
  bool strict = false;  // the interval lies entirely on the satisfying side
  std::optional<double> analytic;
  std::optional<double> analytic_hi;  // second end for interval checks
  std::optional<double> estimate;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  std::string note;
};

struct VerificationReport {
  std::vector<Check> checks;
  SpeedEstimate speed;
  BetaInterval beta;
  std::vector<TailPoint> tail;
  Estimate K;
  double censor_fraction = 1.0;  // pooled over replicas
  std::uint64_t replicas = 0;
  std::uint64_t memory_cap_hits = 0;
  std::uint64_t step_cap_hits = 0;
  Transience transience = Transience::inapplicable;

  const Check* find(std::string_view name) const;
  bool any_fail() const;
};

struct VerifyOptions {
  double z = kZ;
  double gamma_scale = 1.0;  // multiplies gamma in the tail check (fixtures)
  int tail_n_max = 5;
};

VerificationReport verify(const EnvSpec& spec, const BoundsReport& bounds, const std::vector<ReplicaStats>& stats,
                          const CampaignConfig& cfg, const VerifyOptions& opt = {});

}  // namespace rwtree
