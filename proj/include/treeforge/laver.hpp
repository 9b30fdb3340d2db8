#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "treeforge/baire.hpp"
#include "treeforge/core.hpp"
#include "treeforge/finite_tree.hpp"
#include "treeforge/lazy_tree.hpp"
#include "treeforge/node.hpp"
#include "treeforge/surgery.hpp"

namespace treeforge::surgery {

// Desk-scale window onto an omega tree: materializations stop at this depth
// and ignore successor values at or beyond the bound. Branching-by-value
// surgery freezes its per-node decisions against the bound, so the same
// tree queried with smaller bounds stays consistent.
struct omega_horizon {
  std::size_t depth = 8;
  std::uint64_t value_bound = 64;
};

// One selected sub-block per enforced family, read against successor values
// rather than levels.
struct value_plan {
  enumerated_set X;
  coloring h;
  std::vector<std::uint64_t> enforced;  // family indices, strictly increasing
};

namespace detail {

inline std::vector<interval> enforced_blocks(const value_plan& plan) {
  std::vector<interval> out;
  for (std::size_t k = 0; k < plan.enforced.size(); ++k) {
    if (k + 1 < plan.enforced.size() &&
        plan.enforced[k] >= plan.enforced[k + 1])
      throw validation_error(
          "value_plan: enforced families must be strictly increasing");
    std::uint64_t i = plan.enforced[k];
    out.push_back(baire::block(plan.X, i, plan.h.at(i)));
  }
  return out;
}

inline bool in_some_block(const std::vector<interval>& blocks,
                          std::uint64_t v) {
  for (const interval& b : blocks)
    if (b.lo <= v && v < b.hi) return true;
  return false;
}

// Shared successor-value surgery behind the Laver and Miller variants:
// nodes with at most one successor within the frozen horizon pass through
// untouched; at branching nodes only successor values inside an enforced
// sub-block survive. A branching node left without any successor is an
// error naming it; that surfaces when the offending node is first walked,
// because wide omega trees are too expensive to sweep eagerly.
inline lazy_tree value_thin(const lazy_tree& T, const value_plan& plan,
                            const omega_horizon& horizon, const char* label) {
  if (T.width() != width_t::omega)
    throw error(std::string(label) + "_thin: omega-width trees only");
  if (plan.enforced.empty())
    throw validation_error(std::string(label) +
                           "_thin: need at least one enforced family");
  std::vector<interval> blocks = enforced_blocks(plan);
  if (horizon.value_bound < blocks.back().hi)
    throw validation_error(std::string(label) +
                           "_thin: value bound " +
                           std::to_string(horizon.value_bound) +
                           " stops short of the last enforced sub-block");
  lazy_tree base = T;
  std::uint64_t probe_bound = horizon.value_bound;
  std::string name = std::string(label) + "-thinned:" + base.name();
  auto children = [base, blocks, probe_bound,
                   name](const node& t,
                         std::uint64_t vb) -> std::vector<std::uint32_t> {
    std::vector<std::uint32_t> probe = base.children(t, probe_bound);
    if (probe.size() <= 1) return base.children(t, vb);
    std::vector<std::uint32_t> kept;
    for (std::uint32_t v : probe)
      if (in_some_block(blocks, v)) kept.push_back(v);
    if (kept.empty())
      throw validation_error(name + ": no successor of node " + t.str() +
                             " lands in an enforced sub-block");
    std::vector<std::uint32_t> out;
    for (std::uint32_t v : kept)
      if (v < vb) out.push_back(v);
    return out;
  };
  // Thinning only removes successors, so no splitting promise survives;
  // publish a gap that is vacuous inside the horizon instead of a claim
  // the tree may not keep.
  return lazy_tree(width_t::omega, std::move(children),
                   splitting_bound::constant(horizon.depth + 1), name);
}

}  // namespace detail

inline lazy_tree laver_thin(const lazy_tree& T, const value_plan& plan,
                            const omega_horizon& horizon) {
  return detail::value_thin(T, plan, horizon, "laver");
}

inline lazy_tree miller_thin(const lazy_tree& T, const value_plan& plan,
                             const omega_horizon& horizon) {
  return detail::value_thin(T, plan, horizon, "miller");
}

// ---- shape checks within a horizon ----

struct laver_report {
  bool holds = false;
  node stem;  // first branching node, when one exists
  std::vector<node> failures;
};

// Walk the single chain from the root to the first branching node, then
// require at least two successors at every node above it. All judgements
// are relative to the horizon; "no branching at all" fails at the chain's
// tip.
inline laver_report laver_validate(const lazy_tree& T,
                                   const omega_horizon& horizon,
                                   std::size_t node_budget = default_node_budget) {
  if (T.width() != width_t::omega)
    throw error("laver_validate: omega-width trees only");
  finite_tree cut = truncate(T, horizon.depth, horizon.value_bound, node_budget);
  laver_report rep;
  node cur;
  for (;;) {
    std::vector<std::uint32_t> cs = cut.children_of(cur);
    if (cs.size() >= 2) break;
    if (cur.size() >= horizon.depth || cs.empty()) {
      rep.holds = false;
      rep.failures.push_back(cur);
      return rep;
    }
    cur = cur.child(cs[0]);
  }
  rep.stem = cur;
  rep.holds = true;
  auto begin = std::lower_bound(cut.nodes().begin(), cut.nodes().end(), cur);
  for (auto it = begin; it != cut.nodes().end() && cur.is_prefix_of(*it); ++it)
    if (it->size() < horizon.depth && cut.child_count(*it) < 2) {
      rep.holds = false;
      rep.failures.push_back(*it);
    }
  return rep;
}

struct miller_report {
  bool holds = false;
  std::vector<node> branching;  // ramification points inside the horizon
};

// The weakest desk evidence of superperfectness: some branching is visible
// inside the horizon. Anything stronger would promise facts about the tree
// beyond what a finite window can see.
inline miller_report miller_validate(const lazy_tree& T,
                                     const omega_horizon& horizon,
                                     std::size_t node_budget = default_node_budget) {
  if (T.width() != width_t::omega)
    throw error("miller_validate: omega-width trees only");
  finite_tree cut = truncate(T, horizon.depth, horizon.value_bound, node_budget);
  miller_report rep;
  rep.branching = ramification_points(cut);
  rep.holds = !rep.branching.empty();
  return rep;
}

// ---- scale extraction ----

// Greedy scale from a branching tree: starting from 0, each next value is
// the least v within the bound such that every branching node of the
// truncation has a successor value in the previous window [prev, v). The
// result is the maximal such prefix; a tree with no branching node inside
// the horizon has no windows to carve and is rejected.
inline std::vector<std::uint64_t> laver_extract_scale(
    const lazy_tree& T, const omega_horizon& horizon,
    std::size_t node_budget = default_node_budget) {
  finite_tree cut = truncate(T, horizon.depth, horizon.value_bound, node_budget);
  std::vector<std::vector<std::uint32_t>> successor_sets;
  for (const node& t : ramification_points(cut))
    successor_sets.push_back(cut.children_of(t));
  if (successor_sets.empty())
    throw validation_error(
        "laver_extract_scale: no branching node within the horizon");
  std::vector<std::uint64_t> mu{0};
  for (;;) {
    std::uint64_t prev = mu.back();
    std::uint64_t found = 0;
    bool ok = false;
    for (std::uint64_t v = prev + 1; v <= horizon.value_bound && !ok; ++v) {
      ok = true;
      for (const auto& succ : successor_sets) {
        bool hit = std::any_of(succ.begin(), succ.end(), [&](std::uint32_t s) {
          return prev <= s && s < v;
        });
        if (!hit) {
          ok = false;
          break;
        }
      }
      if (ok) found = v;
    }
    if (!ok) return mu;  // maximal prefix within the bound
    mu.push_back(found);
  }
}

// ---- incompatibility by successor values ----

// Certificate that two omega trees have no common strengthening of their
// kind: inside the horizon, no node of the intersection may keep two
// successor values at or above the divergence value. Benign agreement
// (branching that stays below it) is recorded as evidence; the `level` of
// an entry is the successor value witnessing it.
inline incompatibility_certificate value_incompatibility(
    const lazy_tree& A, const lazy_tree& B, std::uint64_t divergence_value,
    const omega_horizon& horizon, forcing_kind kind,
    std::size_t node_budget = default_node_budget) {
  finite_tree a = truncate(A, horizon.depth, horizon.value_bound, node_budget);
  finite_tree b = truncate(B, horizon.depth, horizon.value_bound, node_budget);
  finite_tree common = intersect(a, b);
  incompatibility_certificate cert;
  cert.kind = kind;
  cert.divergence_level = divergence_value;
  cert.checked_to = horizon.depth;
  cert.value_bound = horizon.value_bound;
  for (const node& t : common.nodes()) {
    if (t.size() >= horizon.depth) continue;  // successors not materialized
    std::vector<std::uint32_t> cs = common.children_of(t);
    if (cs.size() < 2) continue;
    std::vector<std::uint32_t> high;
    for (std::uint32_t v : cs)
      if (v >= divergence_value) high.push_back(v);
    if (high.size() >= 2)
      cert.violations.push_back(shared_split{t, high[1]});
    else
      cert.shared.push_back(shared_split{t, cs[0]});
  }
  return cert;
}

inline incompatibility_certificate laver_incompatibility(
    const lazy_tree& A, const lazy_tree& B, std::uint64_t divergence_value,
    const omega_horizon& horizon,
    std::size_t node_budget = default_node_budget) {
  return value_incompatibility(A, B, divergence_value, horizon,
                               forcing_kind::laver, node_budget);
}

inline incompatibility_certificate miller_incompatibility(
    const lazy_tree& A, const lazy_tree& B, std::uint64_t divergence_value,
    const omega_horizon& horizon,
    std::size_t node_budget = default_node_budget) {
  return value_incompatibility(A, B, divergence_value, horizon,
                               forcing_kind::miller, node_budget);
}

}  // namespace treeforge::surgery
