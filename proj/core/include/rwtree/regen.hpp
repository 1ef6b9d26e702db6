#pragma once

// Online detection of regeneration levels and times from a stream of walk
// steps, plus the visit statistics used by the moment bounds.

#include <cstdint>
#include <vector>

#include "rwtree/model.hpp"

namespace rwtree {

struct RegenBlock {
  std::int64_t ell_prev = 0;
  std::int64_t ell_next = 0;
  std::uint64_t tau_prev = 0;
  std::uint64_t tau_next = 0;
  bool censored = false;

  std::int64_t d_ell() const noexcept { return ell_next - ell_prev; }
  std::uint64_t d_tau() const noexcept { return tau_next - tau_prev; }
};

struct VisitStats {
  std::uint64_t L_root = 0;  // visits to the root, time 0 included
  // Distinct vertices visited at each level 0..max_level.
  std::vector<std::uint32_t> pi_levels;
  // Distinct vertices (the root parent included if visited) up to tau_1;
  // 0 when tau_1 is not confirmed.
  std::uint64_t pi_to_tau1 = 0;
  std::uint64_t distinct = 0;  // distinct vertices visited so far
};

struct RegenResult {
  std::vector<RegenBlock> blocks;  // confirmed blocks first, then censored ones
  VisitStats stats;
  std::size_t confirmed = 0;
  std::size_t censored = 0;
  double censor_fraction = 1.0;  // censored / all blocks; 1 without blocks
};

class RegenTracker {
 public:
  // The walk starts at `start` (level `start_level`) at time 0.
  explicit RegenTracker(int guard = 32, NodeId start = TreeArena::root(), int start_level = 0);

  // Events must arrive in trajectory order; throws UsageError otherwise.
  void observe(const StepEvent& ev);

  RegenResult finalize() const;

  int guard() const noexcept { return guard_; }
  std::uint64_t time() const noexcept { return time_; }
  int max_level() const noexcept { return max_level_; }
  // First time the walk stepped into the root parent; 0 if never.
  std::uint64_t d_time() const noexcept { return d_time_; }
  // First hitting time of level k >= 1, or 0 if not reached.
  std::uint64_t first_hit_time(int k) const noexcept {
    return k >= 1 && static_cast<std::size_t>(k) < first_hit_.size() ? first_hit_[k] : 0;
  }
  std::size_t pending_count() const noexcept { return pending_.size(); }
  const VisitStats& stats() const noexcept { return stats_; }

 private:
  struct Pending {
    int level;
    NodeId vertex;
    std::uint64_t time;
    std::uint64_t distinct;
  };

  int guard_;
  NodeId pos_;
  int level_;
  std::uint64_t time_ = 0;
  int max_level_;
  std::uint64_t d_time_ = 0;
  std::vector<Pending> pending_;
  std::vector<std::uint64_t> first_hit_;
  VisitStats stats_;
};

}  // namespace rwtree
