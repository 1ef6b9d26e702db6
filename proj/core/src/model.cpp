#include "rwtree/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rwtree/error.hpp"

namespace rwtree {

std::string_view to_string(ModelKind m) noexcept { return m == ModelKind::rwre ? "rwre" : "orrw"; }

std::string_view to_string(Coupling c) noexcept { return c == Coupling::iid ? "iid" : "identical"; }

std::string_view to_string(Transience t) noexcept {
  switch (t) {
    case Transience::transient:
      return "transient";
    case Transience::recurrent:
      return "recurrent";
    case Transience::inapplicable:
      return "inapplicable";
  }
  return "inapplicable";
}

void EnvSpec::validate() const {
  if (b < 2) throw ConfigError("b must be >= 2", "/env/b");
  if (model == ModelKind::orrw) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be positive", "/env/delta");
    return;
  }
  if (support.empty()) throw ConfigError("support must be non-empty", "/env/support");
  double total = 0.0;
  for (const Atom& a : support) {
    if (!(a.value > 0.0) || !std::isfinite(a.value)) {
      throw ConfigError("support values must be positive and finite", "/env/support");
    }
    if (!(a.prob >= 0.0) || a.prob > 1.0) throw ConfigError("probabilities must lie in [0,1]", "/env/support");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("probabilities must sum to 1", "/env/support");
}

EnvSpec EnvSpec::rwre(int b, std::vector<Atom> support, Coupling c) {
  EnvSpec s;
  s.model = ModelKind::rwre;
  s.b = b;
  s.support = std::move(support);
  s.coupling = c;
  return s;
}

EnvSpec EnvSpec::orrw(int b, double delta) {
  EnvSpec s;
  s.model = ModelKind::orrw;
  s.b = b;
  s.delta = delta;
  return s;
}

std::vector<double> transition_weights_rwre(std::span<const double> a) {
  double sum = 0.0;
  for (double x : a) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("environment entries must be positive and finite");
    sum += x;
  }
  std::vector<double> w(a.size() + 1);
  const double z = 1.0 + sum;
  w[0] = 1.0 / z;
  for (std::size_t i = 0; i < a.size(); ++i) w[i + 1] = a[i] / z;
  return w;
}

EnvVector sample_env(VertexKey vertex, const EnvSpec& spec, const ClockSource& env_stream) {
  std::vector<double> probs;
  probs.reserve(spec.support.size());
  for (const Atom& a : spec.support) probs.push_back(a.prob);
  EnvVector out(static_cast<std::size_t>(spec.b));
  if (spec.coupling == Coupling::identical) {
    const double v = spec.support[sample_categorical(probs, env_stream.uniform(vertex, 0, 0))].value;
    std::fill(out.begin(), out.end(), v);
  } else {
    for (int i = 0; i < spec.b; ++i) {
      out[i] = spec.support[sample_categorical(probs, env_stream.uniform(vertex, i + 1, 0))].value;
    }
  }
  return out;
}

std::vector<std::pair<EnvVector, double>> enumerate_env(const EnvSpec& spec, std::uint64_t cap) {
  std::vector<std::pair<EnvVector, double>> out;
  const std::size_t k = spec.support.size();
  if (spec.coupling == Coupling::identical) {
    for (const Atom& at : spec.support) out.emplace_back(EnvVector(static_cast<std::size_t>(spec.b), at.value), at.prob);
    return out;
  }
  if (std::pow(static_cast<double>(k), spec.b) > static_cast<double>(cap)) {
    throw ConfigError("support^b exceeds the enumeration cap", "/env/support");
  }
  std::vector<std::size_t> idx(static_cast<std::size_t>(spec.b), 0);
  for (;;) {
    EnvVector a(static_cast<std::size_t>(spec.b));
    double p = 1.0;
    for (int i = 0; i < spec.b; ++i) {
      a[i] = spec.support[idx[i]].value;
      p *= spec.support[idx[i]].prob;
    }
    out.emplace_back(std::move(a), p);
    int i = 0;
    while (i < spec.b && ++idx[i] == k) idx[i++] = 0;
    if (i == spec.b) break;
  }
  return out;
}

TransienceResult transience_check(const EnvSpec& spec, double tolerance) {
  TransienceResult r;
  r.threshold = 1.0 / spec.b;
  if (spec.model == ModelKind::orrw) {
    r.verdict = Transience::transient;
    return r;
  }
  if (spec.support.empty()) throw DomainError("transience_check: empty support");
  auto phi = [&](double t) {
    double s = 0.0;
    for (const Atom& a : spec.support) s += a.prob * std::pow(a.value, t);
    return s;
  };
  constexpr int kGrid = 1000;
  int best = 0;
  double best_val = phi(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = phi(static_cast<double>(i) / kGrid);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  // phi is convex: refine inside the bracketing grid cells.
  double lo = std::max(0.0, (best - 1.0) / kGrid);
  double hi = std::min(1.0, (best + 1.0) / kGrid);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = phi(x1), f2 = phi(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = phi(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = phi(x2);
    }
  }
  r.argmin_t = best / static_cast<double>(kGrid);
  r.min_phi = best_val;
  const double mid = 0.5 * (lo + hi);
  if (phi(mid) < r.min_phi) {
    r.min_phi = phi(mid);
    r.argmin_t = mid;
  }
  if (r.min_phi > r.threshold + tolerance) {
    r.verdict = Transience::transient;
  } else if (r.min_phi < r.threshold - tolerance) {
    r.verdict = Transience::recurrent;
  } else {
    r.verdict = Transience::inapplicable;
  }
  return r;
}

// ---------------------------------------------------------------------------

TreeArena::TreeArena(int b, std::size_t max_vertices) : b_(b), max_vertices_(std::max<std::size_t>(max_vertices, 2)) {
  parent_ = {kNoNode, 0};
  level_ = {-1, 0};
  slot_ = {-1, 0};
  key_ = {kRootParentKey, kRootKey};
  children_.assign(2 * static_cast<std::size_t>(b_), kNoNode);
  children_[0] = root();  // the root parent has the root as its only child
}

NodeId TreeArena::materialize_child(NodeId v, int slot) {
  const std::size_t idx = static_cast<std::size_t>(v) * b_ + (slot - 1);
  if (children_[idx] != kNoNode) return children_[idx];
  if (parent_.size() >= max_vertices_) throw MemoryCapExceeded("vertex cap exceeded");
  const auto id = static_cast<NodeId>(parent_.size());
  parent_.push_back(v);
  level_.push_back(level_[v] + 1);
  slot_.push_back(slot);
  key_.push_back(child_key(key_[v], slot));
  children_.resize(children_.size() + b_, kNoNode);
  children_[idx] = id;
  return id;
}

NodeId TreeArena::descend(std::span<const int> slots) {
  NodeId v = root();
  for (int s : slots) {
    if (s < 1 || s > b_) throw UsageError("descend: child slot out of range");
    v = materialize_child(v, s);
  }
  return v;
}

std::vector<int> TreeArena::path_to(NodeId v) const {
  std::vector<int> out;
  while (v != root() && v != root_parent()) {
    out.push_back(slot_[v]);
    v = parent_[v];
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double WeightState::weight(const TreeArena& tree, NodeId v, int slot) const noexcept {
  if (slot == 0) return crossed(v) ? delta_ : 1.0;
  const NodeId c = tree.child(v, slot);
  return (c != kNoNode && crossed(c)) ? delta_ : 1.0;
}

std::size_t WeightState::crossed_count() const noexcept {
  return static_cast<std::size_t>(std::count(crossed_.begin(), crossed_.end(), std::uint8_t{1}));
}

std::vector<double> transition_weights_orrw(const WeightState& w, const TreeArena& tree, NodeId v) {
  const int b = tree.b();
  std::vector<double> out(static_cast<std::size_t>(b) + 1, 0.0);
  if (v == TreeArena::root_parent()) {
    out[1] = 1.0;
    return out;
  }
  double z = 0.0;
  for (int s = 0; s <= b; ++s) {
    out[s] = w.weight(tree, v, s);
    z += out[s];
  }
  for (double& x : out) x /= z;
  return out;
}

// ---------------------------------------------------------------------------

Walk::Walk(const EnvSpec& spec, const SeedSpec& seed) : Walk(spec, seed, Options{}) {}

Walk::Walk(const EnvSpec& spec, const SeedSpec& seed, Options options)
    : spec_(spec),
      opt_(std::move(options)),
      clocks_(seed),
      env_stream_(env_seed_for(seed)),
      tree_(spec.b, opt_.max_vertices),
      weights_(spec.model == ModelKind::orrw ? spec.delta : 1.0),
      b_(spec.b),
      pos_(TreeArena::root()) {
  spec_.validate();
  pos_ = tree_.descend(opt_.start_path);
  grow();
  // Edges from the root parent down to the start vertex begin reinforced.
  for (NodeId v = pos_; v != TreeArena::root_parent(); v = tree_.parent(v)) weights_.mark(v);
  visited_[pos_] = 1;
}

void Walk::grow() {
  const std::size_t n = tree_.size();
  if (ready_.size() >= n) return;
  ready_.resize(n, 0);
  visited_.resize(n, 0);
  weights_.grow(n);
  const std::size_t per = static_cast<std::size_t>(b_) + 1;
  if (spec_.model == ModelKind::rwre) omega_.resize(n * per, 0.0);
  epoch_.resize(n * per, 0.0);
  used_.resize(n * per, 0);
}

EnvVector Walk::env(NodeId v) const { return sample_env(tree_.key(v), spec_, env_stream_); }

std::vector<double> Walk::transition_weights(NodeId v) {
  if (spec_.model == ModelKind::orrw) return transition_weights_orrw(weights_, tree_, v);
  if (v == TreeArena::root_parent()) {
    std::vector<double> out(static_cast<std::size_t>(b_) + 1, 0.0);
    out[1] = 1.0;
    return out;
  }
  return transition_weights_rwre(env(v));
}

void Walk::init_vertex(NodeId v) {
  if (spec_.model == ModelKind::rwre) {
    const std::vector<double> w = transition_weights_rwre(env(v));
    std::copy(w.begin(), w.end(), omega_.begin() + static_cast<std::ptrdiff_t>(v) * (b_ + 1));
  }
  ready_[v] = 1;
}

double Walk::rate(NodeId v, int slot) const noexcept {
  if (spec_.model == ModelKind::rwre) return omega_[static_cast<std::size_t>(v) * (b_ + 1) + slot];
  return weights_.weight(tree_, v, slot);
}

StepEvent Walk::step() {
  StepEvent ev;
  ev.from = pos_;
  ev.from_level = tree_.level(pos_);
  const NodeId v = pos_;
  NodeId next;
  if (v == TreeArena::root_parent()) {
    next = TreeArena::root();
  } else {
    if (!ready_[v]) init_vertex(v);
    const std::size_t base = static_cast<std::size_t>(v) * (b_ + 1);
    const VertexKey key = tree_.key(v);
    int best = -1;
    double best_t = 0.0;
    for (int s = 0; s <= b_; ++s) {
      if (!allowed(v, s)) continue;
      if (used_[base + s] == 0) {
        used_[base + s] = 1;
        epoch_[base + s] = clocks_.clock(key, static_cast<std::uint32_t>(s), 1) / rate(v, s);
      }
      const double t = epoch_[base + s];
      if (best < 0 || t < best_t) {
        best = s;
        best_t = t;
      }
    }
    if (best < 0) throw UsageError("walk: no allowed neighbor");
    if (best == 0) {
      next = tree_.parent(v);
      weights_.mark(v);
    } else {
      next = tree_.materialize_child(v, best);
      grow();
      weights_.mark(next);
    }
    const std::uint32_t k = ++used_[base + best];
    epoch_[base + best] += clocks_.clock(key, static_cast<std::uint32_t>(best), k) / rate(v, best);
  }
  ev.first_visit = visited_[next] == 0;
  visited_[next] = 1;
  pos_ = next;
  ++time_;
  ev.time = time_;
  ev.to = next;
  ev.to_level = tree_.level(next);
  return ev;
}

}  // namespace rwtree
