#pragma once

// Keyed, counter-mode randomness. Every random quantity in a replica is a
// pure function of (SeedSpec, key), so the main walk and any number of
// extension processes can read the same exponential clocks h_k(v, u)
// without coordinating.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>

namespace rwtree {

enum class Purpose : std::uint8_t { walk = 0, offspring_mc = 1, env = 2 };

std::string_view to_string(Purpose p) noexcept;

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replica_index = 0;
  Purpose purpose = Purpose::walk;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) noexcept {
  return mix64(seed ^ (mix64(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

std::uint64_t stream_id(const SeedSpec& s) noexcept;

// Environment stream owned by a process. The env stream of a walk replica
// is SeedSpec{seed, i, env}; offspring sampling gets a salted master seed
// so its environments never alias those of walk replicas.
SeedSpec env_seed_for(const SeedSpec& owner) noexcept;

// Canonical identity of a tree vertex: a hash of its path from the root.
// Independent of arena layout, so distinct processes agree on it.
using VertexKey = std::uint64_t;

inline constexpr VertexKey kRootParentKey = 0x2545f4914f6cdd1dULL;
inline constexpr VertexKey kRootKey = 0x5851f42d4c957f2dULL;

constexpr VertexKey child_key(VertexKey parent, int slot) noexcept {
  return hash_combine(parent, static_cast<std::uint64_t>(slot) + 1);
}

// Neighbor slot 0 is the parent; children occupy slots 1..b.
inline constexpr std::uint32_t kParentSlot = 0;

struct StreamKey {
  VertexKey vertex = 0;
  std::uint32_t neighbor_slot = 0;
  std::uint64_t index = 1;  // k >= 1

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

// Maps 64 random bits to the open interval (0, 1).
constexpr double unit_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

class ClockSource {
 public:
  explicit ClockSource(const SeedSpec& seed) noexcept : stream_(stream_id(seed)) {}

  std::uint64_t stream() const noexcept { return stream_; }

  // Unit-mean exponential h_k(vertex, neighbor); strictly positive, finite.
  double clock(VertexKey vertex, std::uint32_t slot, std::uint64_t k) const noexcept;
  double operator()(const StreamKey& key) const noexcept {
    return clock(key.vertex, key.neighbor_slot, key.index);
  }

  std::uint64_t bits(VertexKey vertex, std::uint64_t a, std::uint64_t b) const noexcept {
    return hash_combine(hash_combine(hash_combine(stream_, vertex), a), b);
  }
  double uniform(VertexKey vertex, std::uint64_t a, std::uint64_t b) const noexcept {
    return unit_open(bits(vertex, a, b));
  }

 private:
  std::uint64_t stream_;
};

// Explicit per-replica memo over a ClockSource. Values are already a pure
// function of the key; the cache guarantees replay through one lookup path.
class ClockCache {
 public:
  explicit ClockCache(const SeedSpec& seed) : source_(seed) {}

  double clock(const StreamKey& key);
  std::size_t size() const noexcept { return memo_.size(); }
  const ClockSource& source() const noexcept { return source_; }

 private:
  struct KeyHash {
    std::size_t operator()(const StreamKey& k) const noexcept {
      return static_cast<std::size_t>(
          hash_combine(hash_combine(k.vertex, k.neighbor_slot), k.index));
    }
  };
  ClockSource source_;
  std::unordered_map<StreamKey, double, KeyHash> memo_;
};

// argmin_i clocks[i] / weights[i]; exact ties go to the lowest index.
// Throws UsageError on empty or mismatched input, DomainError on a
// non-positive weight.
std::size_t race(std::span<const double> weights, std::span<const double> clocks);

// Inverse-CDF categorical draw from a probability vector with a uniform u.
std::size_t sample_categorical(std::span<const double> probs, double u) noexcept;

}  // namespace rwtree
