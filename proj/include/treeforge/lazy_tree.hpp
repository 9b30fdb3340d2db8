#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treeforge/core.hpp"
#include "treeforge/finite_tree.hpp"
#include "treeforge/node.hpp"

namespace treeforge {

// Depth-indexed splitting gap: every reachable node t is promised a
// ramifying descendant at depth < |t| + gap(|t|). The raw function is
// normalized with a running maximum so the published gap is monotone
// nondecreasing even if the caller's isn't.
class splitting_bound {
 public:
  splitting_bound() : splitting_bound(constant(1)) {}

  static splitting_bound constant(std::size_t g) {
    if (g == 0) throw validation_error("splitting_bound: gap must be >= 1");
    return splitting_bound([g](std::size_t) { return g; });
  }

  static splitting_bound from_function(std::function<std::size_t(std::size_t)> f) {
    return splitting_bound(std::move(f));
  }

  std::size_t gap(std::size_t depth) const {
    std::size_t g = 1;
    for (std::size_t d = 0; d <= depth; ++d) g = std::max(g, raw_(d));
    if (g == 0) throw validation_error("splitting_bound: gap must be >= 1");
    return g;
  }

 private:
  explicit splitting_bound(std::function<std::size_t(std::size_t)> f)
      : raw_(std::move(f)) {}
  std::function<std::size_t(std::size_t)> raw_;
};

// A possibly infinite tree presented by a pure successor oracle. Binary
// oracles return a subset of {0,1}; omega oracles enumerate successor
// values strictly below the value bound they are queried with, in
// increasing order. Perfectness is never assumed: the attached
// splitting_bound is a certificate that can be checked to any depth.
//
// Restriction to a node is represented structurally (shared oracle plus a
// cone prefix), so trees produced by restricting the same oracle along the
// same node compare equal. The finite condition poset leans on that.
class lazy_tree {
 public:
  using children_fn =
      std::function<std::vector<std::uint32_t>(const node&, std::uint64_t)>;

  lazy_tree(width_t width, children_fn children, splitting_bound bound,
            std::string name)
      : impl_(std::make_shared<impl>(
            impl{width, std::move(children), std::move(bound),
                 std::move(name)})) {}

  width_t width() const { return impl_->width; }
  const splitting_bound& bound() const { return impl_->bound; }
  const node& cone() const { return cone_; }
  const std::string& name() const { return impl_->name; }

  // Successors of t. Walks below the cone are single chains along it.
  std::vector<std::uint32_t> children(const node& t,
                                      std::uint64_t value_bound) const {
    if (t.size() < cone_.size()) {
      if (!t.is_prefix_of(cone_))
        throw error("lazy_tree: node " + t.str() + " is outside the cone " +
                    cone_.str());
      std::uint32_t next = cone_[t.size()];
      if (next >= value_bound) return {};
      return {next};
    }
    if (!cone_.is_prefix_of(t))
      throw error("lazy_tree: node " + t.str() + " is outside the cone " +
                  cone_.str());
    return impl_->children(t, value_bound);
  }

  std::vector<std::uint32_t> children(const node& t) const {
    if (impl_->width != width_t::binary)
      throw error("lazy_tree: omega-width successor query needs a value bound");
    return children(t, 2);
  }

  // Membership by walking the oracle entry by entry from the root.
  bool contains(const node& t, std::uint64_t value_bound = 2) const {
    node cur;
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::uint64_t vb = impl_->width == width_t::binary
                             ? 2
                             : std::max<std::uint64_t>(value_bound,
                                                       std::uint64_t(t[i]) + 1);
      std::vector<std::uint32_t> cs = children(cur, vb);
      if (std::find(cs.begin(), cs.end(), t[i]) == cs.end()) return false;
      cur = cur.child(t[i]);
    }
    return true;
  }

  // Restriction to the cone of t. t must be a member; restricting a
  // restriction composes (the deeper node wins when comparable).
  lazy_tree restrict_to(const node& t, std::uint64_t value_bound = 2) const {
    if (!contains(t, value_bound))
      throw error("lazy_tree::restrict_to: node " + t.str() +
                  " is not in the tree");
    lazy_tree out = *this;
    if (t.size() > cone_.size()) out.cone_ = t;
    return out;
  }

  // Identity as a presented object: same oracle, same cone. This is how
  // side trees of the finite condition poset are compared; it is finer
  // than extensional equality on purpose.
  friend bool same_tree(const lazy_tree& a, const lazy_tree& b) {
    return a.impl_ == b.impl_ && a.cone_ == b.cone_;
  }

 private:
  struct impl {
    width_t width;
    children_fn children;
    splitting_bound bound;
    std::string name;
  };
  std::shared_ptr<const impl> impl_;
  node cone_;
};

// ---- materialization ----

inline constexpr std::size_t default_node_budget = std::size_t(1) << 22;

// Breadth-first materialization of all nodes of length <= depth. Binary
// trees must not present dead ends; an omega node whose successors all sit
// at or above the value bound simply becomes a leaf of the materialization.
// The node budget guards against oracles whose truncation would not fit in
// memory; hitting it throws rather than degrading silently.
inline finite_tree truncate(const lazy_tree& T, std::size_t depth,
                            std::uint64_t value_bound = 2,
                            std::size_t node_budget = default_node_budget) {
  if (T.width() == width_t::binary) value_bound = 2;
  std::vector<node> all;
  std::deque<node> frontier;
  frontier.push_back(node::root());
  while (!frontier.empty()) {
    node t = std::move(frontier.front());
    frontier.pop_front();
    all.push_back(t);
    if (all.size() > node_budget)
      throw horizon_error("truncate: node budget exhausted at depth " +
                          std::to_string(t.size()));
    if (t.size() == depth) continue;
    std::vector<std::uint32_t> cs = T.children(t, value_bound);
    if (cs.empty()) {
      if (T.width() == width_t::binary)
        throw validation_error("truncate: dead end at node " + t.str());
      continue;  // omega: no successor below the bound, leaf here
    }
    for (std::uint32_t v : cs) frontier.push_back(t.child(v));
  }
  return finite_tree::from_nodes(T.width(), std::move(all));
}

// Check the splitting-bound certificate to the given depth: every
// materialized node t with |t| + gap(|t|) <= depth must have a ramifying
// descendant strictly before |t| + gap(|t|). Returns the violating nodes.
inline std::vector<node> verify_splitting_bound(
    const lazy_tree& T, std::size_t depth, std::uint64_t value_bound = 2,
    std::size_t node_budget = default_node_budget) {
  finite_tree cut = truncate(T, depth, value_bound, node_budget);
  std::vector<node> bad;
  for (const node& t : cut.nodes()) {
    std::size_t g = T.bound().gap(t.size());
    if (t.size() + g > depth) continue;
    if (!ramifies_below(cut, t, t.size() + g, ramify_mode::inclusive))
      bad.push_back(t);
  }
  return bad;
}

// ---- stock oracles ----

inline lazy_tree full_binary_tree() {
  return lazy_tree(
      width_t::binary,
      [](const node&, std::uint64_t) {
        return std::vector<std::uint32_t>{0, 1};
      },
      splitting_bound::constant(1), "full-binary");
}

inline lazy_tree full_omega_tree() {
  return lazy_tree(
      width_t::omega,
      [](const node&, std::uint64_t vb) {
        std::vector<std::uint32_t> out;
        out.reserve(vb);
        for (std::uint64_t v = 0; v < vb; ++v)
          out.push_back(std::uint32_t(v));
        return out;
      },
      splitting_bound::constant(1), "full-omega");
}

// Successor values a*k + b at every node; handy as a sparse omega oracle.
inline lazy_tree arithmetic_omega_tree(std::uint64_t a, std::uint64_t b) {
  if (a == 0) throw validation_error("arithmetic_omega_tree: step must be >= 1");
  return lazy_tree(
      width_t::omega,
      [a, b](const node&, std::uint64_t vb) {
        std::vector<std::uint32_t> out;
        for (std::uint64_t v = b; v < vb; v += a)
          out.push_back(std::uint32_t(v));
        return out;
      },
      splitting_bound::constant(1),
      "omega-arith:" + std::to_string(a) + ":" + std::to_string(b));
}

// The single branch of zeros. Not perfect; useful as a degenerate input.
inline lazy_tree chain_tree() {
  return lazy_tree(
      width_t::binary,
      [](const node&, std::uint64_t) {
        return std::vector<std::uint32_t>{0};
      },
      splitting_bound::constant(1), "chain");
}

// Wrap an explicit finite tree as an oracle. Below each leaf the tree
// continues as a chain of zeros, so walks never dead-end; no splitting is
// invented. The bound certificate is only meaningful up to the explicit
// part's depth.
inline lazy_tree from_finite(const finite_tree& F) {
  auto base = std::make_shared<finite_tree>(F);
  return lazy_tree(
      F.width(),
      [base](const node& t, std::uint64_t vb) -> std::vector<std::uint32_t> {
        if (base->contains(t)) {
          std::vector<std::uint32_t> cs = base->children_of(t);
          if (!cs.empty()) {
            std::vector<std::uint32_t> out;
            for (std::uint32_t v : cs)
              if (v < vb) out.push_back(v);
            return out;
          }
          return vb > 0 ? std::vector<std::uint32_t>{0}
                        : std::vector<std::uint32_t>{};
        }
        // Beyond the explicit part: on the zero-chain below some leaf.
        return vb > 0 ? std::vector<std::uint32_t>{0}
                      : std::vector<std::uint32_t>{};
      },
      splitting_bound::constant(std::max<std::size_t>(1, F.depth() + 1)),
      "explicit");
}

}  // namespace treeforge
