#include "rwtree/rng.hpp"

#include <cmath>

#include "rwtree/error.hpp"

namespace rwtree {

std::string_view to_string(Purpose p) noexcept {
  switch (p) {
    case Purpose::walk:
      return "walk";
    case Purpose::offspring_mc:
      return "offspring_mc";
    case Purpose::env:
      return "env";
  }
  return "unknown";
}

std::uint64_t stream_id(const SeedSpec& s) noexcept {
  std::uint64_t h = mix64(s.master_seed);
  h = hash_combine(h, s.replica_index);
  return hash_combine(h, static_cast<std::uint64_t>(s.purpose) + 0x51ed2705ULL);
}

SeedSpec env_seed_for(const SeedSpec& owner) noexcept {
  std::uint64_t master = owner.master_seed;
  if (owner.purpose != Purpose::walk) {
    master = hash_combine(master, static_cast<std::uint64_t>(owner.purpose) + 0xa0761d64ULL);
  }
  return SeedSpec{master, owner.replica_index, Purpose::env};
}

double ClockSource::clock(VertexKey vertex, std::uint32_t slot, std::uint64_t k) const noexcept {
  return -std::log(unit_open(bits(vertex, slot, k)));
}

double ClockCache::clock(const StreamKey& key) {
  auto [it, inserted] = memo_.try_emplace(key, 0.0);
  if (inserted) it->second = source_(key);
  return it->second;
}

std::size_t race(std::span<const double> weights, std::span<const double> clocks) {
  if (weights.empty() || weights.size() != clocks.size()) {
    throw UsageError("race: weights and clocks must be non-empty and of equal length");
  }
  std::size_t best = 0;
  double best_time = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) throw DomainError("race: weights must be positive");
    const double t = clocks[i] / weights[i];
    if (i == 0 || t < best_time) {
      best = i;
      best_time = t;
    }
  }
  return best;
}

std::size_t sample_categorical(std::span<const double> probs, double u) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.empty() ? 0 : probs.size() - 1;
}

}  // namespace rwtree
