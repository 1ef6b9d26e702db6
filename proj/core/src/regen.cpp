#include "rwtree/regen.hpp"

#include "rwtree/error.hpp"

namespace rwtree {

RegenTracker::RegenTracker(int guard, NodeId start, int start_level)
    : guard_(guard), pos_(start), level_(start_level), max_level_(start_level) {
  if (guard < 1) throw UsageError("regen: guard must be >= 1");
  if (start_level < 0) throw UsageError("regen: the walk must start at level >= 0");
  first_hit_.assign(static_cast<std::size_t>(start_level) + 1, 0);
  stats_.pi_levels.assign(static_cast<std::size_t>(start_level) + 1, 0);
  stats_.pi_levels[start_level] = 1;
  stats_.distinct = 1;
  if (start == TreeArena::root()) stats_.L_root = 1;
}

void RegenTracker::observe(const StepEvent& ev) {
  if (ev.time != time_ + 1 || ev.from != pos_ || ev.from_level != level_ ||
      (ev.to_level != level_ + 1 && ev.to_level != level_ - 1)) {
    throw UsageError("regen: out-of-order or inconsistent step event");
  }
  if (ev.to_level < level_ && !pending_.empty() && pending_.back().vertex == ev.from) {
    pending_.pop_back();
  }
  time_ = ev.time;
  pos_ = ev.to;
  level_ = ev.to_level;
  if (ev.to == TreeArena::root_parent() && d_time_ == 0) d_time_ = time_;
  if (ev.to == TreeArena::root()) ++stats_.L_root;
  if (ev.first_visit) {
    ++stats_.distinct;
    if (level_ >= 0) {
      if (static_cast<std::size_t>(level_) >= stats_.pi_levels.size()) stats_.pi_levels.resize(level_ + 1, 0);
      ++stats_.pi_levels[level_];
    }
  }
  if (level_ > max_level_) {
    max_level_ = level_;
    first_hit_.push_back(time_);
    pending_.push_back(Pending{level_, pos_, time_, stats_.distinct});
  }
}

RegenResult RegenTracker::finalize() const {
  RegenResult r;
  r.stats = stats_;
  std::int64_t ell = 0;
  std::uint64_t tau = 0;
  bool first = true;
  for (const Pending& p : pending_) {
    RegenBlock blk;
    blk.ell_prev = ell;
    blk.tau_prev = tau;
    blk.ell_next = p.level;
    blk.tau_next = p.time;
    blk.censored = p.level + guard_ > max_level_;
    if (blk.censored) {
      ++r.censored;
    } else {
      ++r.confirmed;
      if (first) r.stats.pi_to_tau1 = p.distinct;
    }
    first = false;
    r.blocks.push_back(blk);
    ell = p.level;
    tau = p.time;
  }
  const std::size_t total = r.confirmed + r.censored;
  r.censor_fraction = total == 0 ? 1.0 : static_cast<double>(r.censored) / static_cast<double>(total);
  return r;
}

}  // namespace rwtree
