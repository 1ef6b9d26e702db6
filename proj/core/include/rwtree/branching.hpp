#pragma once

// The coloring branching process: offspring laws (exact race formula for
// one-level RWRE, shared-clock ray extensions otherwise), its generating
// function, extinction probability, the pruning horizon and the root of the
// pruned compound process.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rwtree/model.hpp"

namespace rwtree {

enum class Provenance { exact, monte_carlo };
std::string_view to_string(Provenance p) noexcept;

struct OffspringDist {
  std::vector<double> probs;  // indexed 0..b^psi
  int psi = 1;
  Provenance provenance = Provenance::exact;
  std::uint64_t samples = 0;
  std::vector<double> std_errors;  // per entry; empty for exact laws
  std::uint64_t cap_hits = 0;      // rays stopped by the step cap (counted uncolored)

  double mean() const noexcept;
};

// P(colored set = S) summed over |S| = k and averaged over the environment,
// for psi = 1 only. Throws Unsupported for ORRW.
OffspringDist offspring_exact_rwre_psi1(const EnvSpec& spec);

// Probability that the ray extension from the root, restricted to one ray,
// hits the RWRE level-psi vertex before the root parent, for a fixed ray
// environment (a_0, ..., a_{psi-1}) of forward numerators.
double ray_hit_prob_rwre(std::span<const double> ray_a);

double ray_hit_prob_orrw(int psi, double delta);

struct OffspringMcOptions {
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::uint64_t ray_step_cap = 10'000'000;
};

// Per sample, runs the ray extension towards each of the b^psi level-psi
// vertices with the sample's shared clock streams and counts colored ones.
OffspringDist offspring_mc(const EnvSpec& spec, int psi, const OffspringMcOptions& opt);

// Exact mean offspring. RWRE enumerates support^psi ray environments and
// throws ConfigError when that exceeds `enumeration_cap`.
double mean_offspring(const EnvSpec& spec, int psi, std::uint64_t enumeration_cap = 1u << 22);

struct PsiSelection {
  bool ok = false;
  int psi = 0;
  double m = 0.0;
  std::string reason;
};

PsiSelection select_psi(const EnvSpec& spec, int psi_max, double margin = 1e-9);

double pgf(std::span<const double> probs, double x) noexcept;
double pgf_mean(std::span<const double> probs) noexcept;

// q_0 = p_0 + p_1, q_k = p_{k+1}.
std::vector<double> pruned(std::span<const double> probs);

// Smallest fixed point in [0,1] of a nondecreasing convex map F with F(1) = 1.
// Monotone iteration from 0 (increment below 1e-12, at most 1e6 rounds)
// followed by a bracketing bisection.
double smallest_fixed_point(const std::function<double(double)>& F);

// Returns 1 when the mean is <= 1.
double extinction_probability(std::span<const double> probs);

// Smallest zeta >= 1 with m^(zeta-1) (m - 1) > 1. DomainError if m <= 1.
int zeta_horizon(double m);

// Smallest fixed point of f^(zeta-1)(g(x)), f the offspring generating
// function and g the pruned one. DomainError when m^(zeta-1)(m-1) <= 1.
double gamma_root(std::span<const double> probs, int zeta);

// Stochastically smallest and largest laws inside the box
// probs +- z * std_errors intersected with the simplex.
std::vector<double> stochastic_extreme(std::span<const double> probs, std::span<const double> std_errors, double z,
                                       bool smallest);

struct BranchingSummary {
  int psi = 1;
  int b = 2;
  double m = 0.0;
  double alpha = 1.0;
  int zeta = 0;
  double gamma = 1.0;
  double vartheta = 0.0;  // b^((zeta-1) psi) (b^psi - 1)
  bool supercritical = false;
  bool gamma_ok = false;
  // Monte Carlo laws only: values at the stochastic extremes of the 3 sigma box.
  bool has_interval = false;
  double alpha_lo = 1.0, alpha_hi = 1.0;
  double gamma_lo = 1.0, gamma_hi = 1.0;
  // Horizon paired with gamma_hi: the horizon of the stochastically
  // smallest law (0 when that law is not supercritical).
  int zeta_hi = 0;
  std::string note;
};

BranchingSummary summarize(const OffspringDist& dist, int b, double z = 3.0);

}  // namespace rwtree
