#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "treeforge/core.hpp"
#include "treeforge/node.hpp"

namespace treeforge {

// A finite prefix-closed set of nodes, kept sorted lexicographically.
// Construction validates closure, the root, and the entry range implied by
// the width, so downstream operations can assume a well-formed tree.
class finite_tree {
 public:
  static finite_tree from_nodes(width_t width, std::vector<node> nodes) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (nodes.empty() || !nodes.front().empty())
      throw validation_error("finite_tree: node set must contain the root");
    for (const node& t : nodes) {
      for (std::uint32_t v : t.entries()) {
        if (width == width_t::binary && v > 1)
          throw validation_error("finite_tree: entry " + std::to_string(v) +
                                 " out of range for width 2 (node " +
                                 t.str() + ")");
      }
      if (!t.empty()) {
        node p = t.parent();
        if (!std::binary_search(nodes.begin(), nodes.end(), p))
          throw validation_error("finite_tree: not prefix-closed, node " +
                                 t.str() + " lacks its parent");
      }
    }
    return finite_tree(width, std::move(nodes));
  }

  // Convenience: closes the given nodes under prefixes (root included).
  static finite_tree closure(width_t width, const std::vector<node>& seeds) {
    std::set<node> all;
    all.insert(node::root());
    for (const node& t : seeds)
      for (std::size_t len = 1; len <= t.size(); ++len)
        all.insert(t.prefix(len));
    return from_nodes(width,
                      std::vector<node>(all.begin(), all.end()));
  }

  width_t width() const { return width_; }
  const std::vector<node>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  bool contains(const node& t) const {
    return std::binary_search(nodes_.begin(), nodes_.end(), t);
  }

  // Maximum node length present.
  std::size_t depth() const {
    std::size_t d = 0;
    for (const node& t : nodes_) d = std::max(d, t.size());
    return d;
  }

  std::vector<std::uint32_t> children_of(const node& t) const {
    std::vector<std::uint32_t> out;
    // In lex order each child's whole cone sits in one contiguous block
    // right after t, so hop from block to block instead of scanning the
    // subtree node by node.
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    while (it != nodes_.end() && t.is_prefix_of(*it)) {
      std::uint32_t v = (*it)[t.size()];
      out.push_back(v);
      it = std::lower_bound(it, nodes_.end(), t.child(v + 1));
    }
    return out;
  }

  std::size_t child_count(const node& t) const {
    return children_of(t).size();
  }

  std::vector<node> at_level(std::size_t level) const {
    std::vector<node> out;
    for (const node& t : nodes_)
      if (t.size() == level) out.push_back(t);
    return out;
  }

  // Nodes without children. For the height-n skeletons of the finite
  // condition poset these must all sit at level n.
  std::vector<node> leaves() const {
    std::vector<node> out;
    for (const node& t : nodes_)
      if (child_count(t) == 0) out.push_back(t);
    return out;
  }

  friend bool operator==(const finite_tree& a, const finite_tree& b) {
    return a.width_ == b.width_ && a.nodes_ == b.nodes_;
  }

 private:
  finite_tree(width_t width, std::vector<node> nodes)
      : width_(width), nodes_(std::move(nodes)) {}

  width_t width_;
  std::vector<node> nodes_;  // sorted lexicographically, unique
};

// ---- elementary operations ----

// Keep prefixes and extensions of t only. t must be a member.
inline finite_tree restrict_tree(const finite_tree& T, const node& t) {
  if (!T.contains(t))
    throw error("restrict_tree: pivot " + t.str() + " is not in the tree");
  std::vector<node> kept;
  for (const node& s : T.nodes())
    if (s.comparable_with(t)) kept.push_back(s);
  return finite_tree::from_nodes(T.width(), std::move(kept));
}

inline finite_tree truncate(const finite_tree& T, std::size_t depth) {
  std::vector<node> kept;
  for (const node& s : T.nodes())
    if (s.size() <= depth) kept.push_back(s);
  return finite_tree::from_nodes(T.width(), std::move(kept));
}

inline bool ramifies_in(const finite_tree& T, const node& t) {
  return T.child_count(t) >= 2;
}

// All nodes with at least two immediate successors.
inline std::vector<node> ramification_points(const finite_tree& T) {
  std::vector<node> out;
  for (const node& t : T.nodes())
    if (ramifies_in(T, t)) out.push_back(t);
  return out;
}

// Number of ramification points among the proper initial segments of t.
// Only defined when t itself ramifies.
inline std::size_t ramification_rank(const finite_tree& T, const node& t) {
  if (!T.contains(t))
    throw error("ramification_rank: node " + t.str() + " not in tree");
  if (!ramifies_in(T, t))
    throw error("ramification_rank: node " + t.str() +
                " is not a ramification point");
  std::size_t rank = 0;
  for (std::size_t len = 0; len < t.size(); ++len)
    if (ramifies_in(T, t.prefix(len))) ++rank;
  return rank;
}

// Ramification points of T whose rank is <= n. In any tree these form a
// front of at most 2^(n+1)-1 nodes.
inline std::vector<node> ramification_points_up_to_rank(const finite_tree& T,
                                                        std::size_t n) {
  std::vector<node> out;
  for (const node& t : T.nodes()) {
    if (!ramifies_in(T, t)) continue;
    std::size_t rank = 0;
    for (std::size_t len = 0; len < t.size() && rank <= n; ++len)
      if (ramifies_in(T, t.prefix(len))) ++rank;
    if (rank <= n) out.push_back(t);
  }
  return out;
}

// Does some extension of s ramify before level k? strict_below reads
// "below k" as length < k-1, inclusive as length < k. Returns the least
// witness (by level, then lexicographically) or nothing.
inline std::optional<node> ramifies_below(const finite_tree& T, const node& s,
                                          std::size_t k, ramify_mode mode) {
  if (!T.contains(s))
    throw error("ramifies_below: node " + s.str() + " not in tree");
  if (k <= s.size())
    throw error("ramifies_below: level bound must exceed the node's length");
  std::size_t limit = (mode == ramify_mode::strict_below)
                          ? (k < 1 ? 0 : k - 1)
                          : k;
  // Extensions of s form one contiguous block in the sorted node list.
  std::optional<node> best;
  auto it = std::lower_bound(T.nodes().begin(), T.nodes().end(), s);
  for (; it != T.nodes().end() && s.is_prefix_of(*it); ++it) {
    const node& t = *it;
    if (t.size() >= limit) continue;
    if (!ramifies_in(T, t)) continue;
    if (!best || t.size() < best->size() || (t.size() == best->size() && t < *best))
      best = t;
  }
  return best;
}

// At most one ramification point per level. Binary trees only.
inline bool is_skew(const finite_tree& T) {
  if (T.width() != width_t::binary)
    throw error("is_skew: defined for width-2 trees only");
  std::set<std::size_t> seen;
  for (const node& t : T.nodes()) {
    if (!ramifies_in(T, t)) continue;
    if (!seen.insert(t.size()).second) return false;
  }
  return true;
}

// Node-set intersection of two trees; prefix-closed and rooted again.
inline finite_tree intersect(const finite_tree& A, const finite_tree& B) {
  if (A.width() != B.width())
    throw error("intersect: width mismatch");
  std::vector<node> common;
  std::set_intersection(A.nodes().begin(), A.nodes().end(),
                        B.nodes().begin(), B.nodes().end(),
                        std::back_inserter(common));
  return finite_tree::from_nodes(A.width(), std::move(common));
}

}  // namespace treeforge
