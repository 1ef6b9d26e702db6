#pragma once

// Rooted b-ary tree with the extra root parent, the RWRE environment and
// the once-reinforced edge weights, plus a walk engine that moves by
// exponential races over shared keyed clocks.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rwtree/rng.hpp"

namespace rwtree {

enum class ModelKind { rwre, orrw };
enum class Coupling { iid, identical };

std::string_view to_string(ModelKind m) noexcept;
std::string_view to_string(Coupling c) noexcept;

struct Atom {
  double value = 1.0;
  double prob = 1.0;
};

struct EnvSpec {
  ModelKind model = ModelKind::rwre;
  int b = 2;
  // rwre: law of one coordinate A^(i); coordinates are iid or identical.
  std::vector<Atom> support;
  Coupling coupling = Coupling::identical;
  // orrw: reinforced weight of a crossed edge.
  double delta = 1.0;

  // Throws ConfigError on violated invariants.
  void validate() const;

  static EnvSpec rwre(int b, std::vector<Atom> support, Coupling c = Coupling::identical);
  static EnvSpec orrw(int b, double delta);
};

// Environment numerators (A^(1), ..., A^(b)) at one vertex.
using EnvVector = std::vector<double>;

// (parent, child 1..b) transition probabilities of the RWRE at a vertex
// other than the root parent. Throws DomainError on non-positive entries.
std::vector<double> transition_weights_rwre(std::span<const double> a);

// Draws the environment vector of a vertex. Pure in (vertex, env stream).
EnvVector sample_env(VertexKey vertex, const EnvSpec& spec, const ClockSource& env_stream);

// Every environment vector of one vertex with its probability, respecting
// the coupling (identical: one per atom; iid: support^b tuples). Throws
// ConfigError above `cap` vectors.
std::vector<std::pair<EnvVector, double>> enumerate_env(const EnvSpec& spec, std::uint64_t cap = 1u << 22);

enum class Transience { transient, recurrent, inapplicable };
std::string_view to_string(Transience t) noexcept;

struct TransienceResult {
  Transience verdict = Transience::inapplicable;
  double min_phi = 0.0;  // inf over [0,1] of E[A^t]
  double argmin_t = 0.0;
  double threshold = 0.0;  // 1/b
};

// Lyons-Pemantle dichotomy on E[A^t], t in [0,1]. ORRW is always transient.
TransienceResult transience_check(const EnvSpec& spec, double tolerance = 1e-9);

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

// Thrown when materializing a vertex would exceed the configured cap.
class MemoryCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Append-only arena of materialized vertices, in first-visit order.
// Node 0 is the root parent (level -1), node 1 is the root (level 0).
class TreeArena {
 public:
  TreeArena(int b, std::size_t max_vertices);

  static constexpr NodeId root_parent() noexcept { return 0; }
  static constexpr NodeId root() noexcept { return 1; }

  int b() const noexcept { return b_; }
  std::size_t size() const noexcept { return parent_.size(); }
  std::size_t max_vertices() const noexcept { return max_vertices_; }

  NodeId parent(NodeId v) const noexcept { return parent_[v]; }
  int level(NodeId v) const noexcept { return level_[v]; }
  int child_slot(NodeId v) const noexcept { return slot_[v]; }  // 1..b; 0 for the root, -1 for its parent
  VertexKey key(NodeId v) const noexcept { return key_[v]; }
  NodeId child(NodeId v, int slot) const noexcept {
    return children_[static_cast<std::size_t>(v) * b_ + (slot - 1)];
  }

  // Returns the child, creating it on first request.
  NodeId materialize_child(NodeId v, int slot);

  // Follows a path of child slots from the root, materializing as needed.
  NodeId descend(std::span<const int> slots);

  // Child slots from the root to v.
  std::vector<int> path_to(NodeId v) const;

 private:
  int b_;
  std::size_t max_vertices_;
  std::vector<NodeId> parent_;
  std::vector<int> level_;
  std::vector<int> slot_;
  std::vector<VertexKey> key_;
  std::vector<NodeId> children_;
};

// ORRW edge state: every edge {v, parent(v)} carries a crossed flag stored
// at v. The edge above the root starts reinforced.
class WeightState {
 public:
  explicit WeightState(double delta) : delta_(delta) {}

  void grow(std::size_t n) { crossed_.resize(n, 0); }
  bool crossed(NodeId child) const noexcept { return crossed_[child] != 0; }
  void mark(NodeId child) noexcept { crossed_[child] = 1; }
  double delta() const noexcept { return delta_; }

  // Weight of the edge from v to neighbor slot (0 = parent).
  double weight(const TreeArena& tree, NodeId v, int slot) const noexcept;

  std::size_t crossed_count() const noexcept;

 private:
  double delta_;
  std::vector<std::uint8_t> crossed_;
};

// Normalized ORRW transition probabilities (parent, child 1..b) at v.
std::vector<double> transition_weights_orrw(const WeightState& w, const TreeArena& tree, NodeId v);

struct StepEvent {
  std::uint64_t time = 0;  // n after the step
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  int from_level = 0;
  int to_level = 0;
  bool first_visit = false;  // `to` had never been visited before
};

// Restricts the neighbor set at a vertex: returns whether the edge from v
// through `slot` (0 = parent) belongs to the subtree the process lives on.
using EdgeFilter = std::function<bool(const TreeArena&, NodeId v, int slot)>;

// Walk driven by exponential races. At its k-th departure from v the walk
// jumps to the allowed neighbor u whose next clock epoch
//   sum_{i <= j(v,u)} h_i(v,u) / w(v,u)
// is smallest, j(v,u) counting departures v -> u so far. The first
// departure compares h_1(v,u)/w(v,u) directly. Marks of a superposition of
// independent Poisson streams are iid categorical with probabilities
// proportional to the rates, so the walk has the model's transition law,
// and any two processes on nested subtrees that share the SeedSpec make
// identical decisions where they overlap.
class Walk {
 public:
  struct Options {
    std::size_t max_vertices = 50'000'000;
    EdgeFilter filter;  // empty: whole tree
    // Start vertex given as child slots from the root; empty = root.
    std::vector<int> start_path;
  };

  Walk(const EnvSpec& spec, const SeedSpec& seed);
  Walk(const EnvSpec& spec, const SeedSpec& seed, Options options);

  StepEvent step();

  NodeId position() const noexcept { return pos_; }
  int level() const noexcept { return tree_.level(pos_); }
  std::uint64_t time() const noexcept { return time_; }
  const TreeArena& tree() const noexcept { return tree_; }
  const EnvSpec& spec() const noexcept { return spec_; }
  const WeightState& weights() const noexcept { return weights_; }

  // Environment at v (RWRE); a pure function of the vertex key.
  EnvVector env(NodeId v) const;
  // Normalized transition probabilities at v under the current state, over
  // (parent, child 1..b), ignoring any filter.
  std::vector<double> transition_weights(NodeId v);

 private:
  void grow();
  void init_vertex(NodeId v);
  double rate(NodeId v, int slot) const noexcept;
  bool allowed(NodeId v, int slot) const { return !opt_.filter || opt_.filter(tree_, v, slot); }

  EnvSpec spec_;
  Options opt_;
  ClockSource clocks_;
  ClockSource env_stream_;
  TreeArena tree_;
  WeightState weights_;
  int b_;
  NodeId pos_;
  std::uint64_t time_ = 0;

  // Per vertex.
  std::vector<std::uint8_t> ready_;
  std::vector<std::uint8_t> visited_;
  std::vector<double> omega_;  // rwre: (b+1) normalized probabilities
  // Per (vertex, neighbor slot).
  std::vector<double> epoch_;
  std::vector<std::uint32_t> used_;
};

}  // namespace rwtree
