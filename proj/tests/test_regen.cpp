#include <gtest/gtest.h>

#include <map>
#include <set>
#include <string>

#include "rwtree/error.hpp"
#include "rwtree/model.hpp"
#include "rwtree/regen.hpp"

using namespace rwtree;

namespace {

// Feeds a scripted path: 'u' steps to the parent, '1'..'9' to that child.
struct Script {
  TreeArena tree{2, 1000};
  NodeId pos = TreeArena::root();
  std::uint64_t time = 0;
  std::set<NodeId> seen = {TreeArena::root()};

  void run(RegenTracker& tr, const std::string& moves) {
    for (char m : moves) tr.observe(next(m));
  }

  StepEvent next(char m) {
    StepEvent e;
    e.from = pos;
    e.from_level = tree.level(pos);
    if (m == 'u') {
      e.to = pos == TreeArena::root() ? TreeArena::root_parent() : tree.parent(pos);
    } else if (pos == TreeArena::root_parent()) {
      e.to = TreeArena::root();
    } else {
      e.to = tree.materialize_child(pos, m - '0');
    }
    e.to_level = tree.level(e.to);
    e.time = ++time;
    e.first_visit = seen.insert(e.to).second;
    pos = e.to;
    return e;
  }
};

}  // namespace

TEST(Regen, StraightDescent) {
  Script s;
  RegenTracker tr(3);
  s.run(tr, "1111111111");
  const RegenResult r = tr.finalize();
  ASSERT_EQ(r.blocks.size(), 10u);
  EXPECT_EQ(r.confirmed, 7u);
  EXPECT_EQ(r.censored, 3u);
  EXPECT_DOUBLE_EQ(r.censor_fraction, 0.3);
  for (std::size_t i = 0; i < r.blocks.size(); ++i) {
    EXPECT_EQ(r.blocks[i].ell_prev, static_cast<std::int64_t>(i));
    EXPECT_EQ(r.blocks[i].d_ell(), 1);
    EXPECT_EQ(r.blocks[i].d_tau(), 1u);
    EXPECT_EQ(r.blocks[i].censored, i >= 7);
  }
  EXPECT_EQ(r.stats.pi_to_tau1, 2u);
  EXPECT_EQ(r.stats.L_root, 1u);
  EXPECT_EQ(tr.first_hit_time(4), 4u);
  EXPECT_EQ(tr.first_hit_time(11), 0u);
  EXPECT_EQ(tr.max_level(), 10);
}

TEST(Regen, BacktrackCancelsACandidate) {
  Script s;
  RegenTracker tr(1);
  // rho -> 1 -> 11 -> 1 -> 12 -> 121 -> 1211
  s.run(tr, "11u211");
  const RegenResult r = tr.finalize();
  ASSERT_EQ(r.blocks.size(), 3u);
  EXPECT_EQ(r.blocks[0].ell_next, 1);
  EXPECT_EQ(r.blocks[0].tau_next, 1u);
  EXPECT_EQ(r.blocks[1].ell_prev, 1);
  EXPECT_EQ(r.blocks[1].ell_next, 3);
  EXPECT_EQ(r.blocks[1].tau_next, 5u);
  EXPECT_FALSE(r.blocks[1].censored);
  EXPECT_TRUE(r.blocks[2].censored);
  EXPECT_EQ(r.stats.pi_levels, (std::vector<std::uint32_t>{1, 1, 2, 1, 1}));
  EXPECT_EQ(r.stats.distinct, 6u);
}

TEST(Regen, DeepBacktrackCancelsEveryCandidateAbove) {
  Script s;
  RegenTracker tr(1);
  s.run(tr, "111uuuu12222");
  const RegenResult r = tr.finalize();
  // Levels 1..3 were cancelled by the return to the root parent; level 4 of
  // the second branch is the first new maximum.
  ASSERT_EQ(r.blocks.size(), 1u);
  EXPECT_EQ(r.blocks[0].ell_next, 4);
  EXPECT_EQ(r.blocks[0].tau_next, 12u);
  EXPECT_TRUE(r.blocks[0].censored);
  EXPECT_EQ(tr.d_time(), 7u);
  EXPECT_EQ(r.stats.L_root, 3u);
}

TEST(Regen, ReturnToRootParent) {
  Script s;
  RegenTracker tr(2);
  s.run(tr, "u11111");
  const RegenResult r = tr.finalize();
  EXPECT_EQ(tr.d_time(), 1u);
  EXPECT_EQ(r.stats.L_root, 2u);
  ASSERT_GE(r.blocks.size(), 1u);
  EXPECT_EQ(r.blocks[0].ell_next, 1);
  EXPECT_EQ(r.blocks[0].tau_next, 3u);
  // The root parent counts among the distinct vertices up to tau_1.
  EXPECT_EQ(r.stats.pi_to_tau1, 3u);
}

TEST(Regen, NoBlocksMeansFullyCensored) {
  RegenTracker tr(4);
  const RegenResult r = tr.finalize();
  EXPECT_TRUE(r.blocks.empty());
  EXPECT_DOUBLE_EQ(r.censor_fraction, 1.0);
  EXPECT_EQ(r.stats.L_root, 1u);
}

TEST(Regen, RejectsInconsistentEvents) {
  Script s;
  RegenTracker tr(2);
  StepEvent e = s.next('1');
  e.time = 5;
  EXPECT_THROW(tr.observe(e), UsageError);
  StepEvent f = s.next('1');
  EXPECT_THROW(tr.observe(f), UsageError);  // from is not the tracker position
  EXPECT_THROW(RegenTracker(0), UsageError);
}

TEST(Regen, InvariantsOnSimulatedWalks) {
  const EnvSpec env = EnvSpec::rwre(2, {{0.3, 1.0 / 30}, {3.5, 29.0 / 30}});
  for (std::uint64_t rep = 0; rep < 30; ++rep) {
    Walk w(env, SeedSpec{5, rep, Purpose::walk});
    RegenTracker tr(8);
    std::map<NodeId, std::uint64_t> local;
    local[TreeArena::root()] = 1;
    std::vector<int> levels = {0};
    for (int i = 0; i < 4000; ++i) {
      const StepEvent e = w.step();
      tr.observe(e);
      ++local[e.to];
      levels.push_back(e.to_level);
    }
    const RegenResult r = tr.finalize();
    EXPECT_EQ(r.stats.L_root, local[TreeArena::root()]);
    EXPECT_EQ(r.stats.distinct, local.size());
    std::uint64_t total = 0;
    for (const auto& [v, c] : local) total += c;
    EXPECT_EQ(total, 4001u);

    std::int64_t ell = 0;
    std::uint64_t tau = 0;
    for (const RegenBlock& b : r.blocks) {
      EXPECT_EQ(b.ell_prev, ell);
      EXPECT_EQ(b.tau_prev, tau);
      EXPECT_GT(b.d_ell(), 0);
      EXPECT_GT(b.d_tau(), 0u);
      ell = b.ell_next;
      tau = b.tau_next;
      if (!b.censored) {
        // Brute force: level ell is first hit at tau and never left below.
        EXPECT_EQ(levels[b.tau_next], b.ell_next);
        for (std::size_t t = 0; t < b.tau_next; ++t) EXPECT_LT(levels[t], b.ell_next);
        for (std::size_t t = b.tau_next; t < levels.size(); ++t) EXPECT_GE(levels[t], b.ell_next);
      }
    }
    if (!r.blocks.empty() && !r.blocks[0].censored) {
      EXPECT_GE(r.stats.pi_to_tau1, static_cast<std::uint64_t>(r.blocks[0].ell_next) + 1);
    }
  }
}
