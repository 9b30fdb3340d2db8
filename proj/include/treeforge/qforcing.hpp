#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "treeforge/core.hpp"
#include "treeforge/finite_tree.hpp"
#include "treeforge/lazy_tree.hpp"
#include "treeforge/node.hpp"
#include "treeforge/surgery.hpp"

namespace treeforge::qforcing {

using surgery::forcing_kind;
using surgery::incompatibility_certificate;

// A finite condition: a skew skeleton F of height n together with one side
// tree per level-n leaf. The side tree of a leaf runs through that leaf:
// its nodes up to level n form exactly the chain of the leaf.
struct q_condition {
  std::size_t n = 0;
  finite_tree F;
  std::vector<std::pair<node, lazy_tree>> side;  // sorted by leaf

  const lazy_tree& side_for(const node& leaf) const {
    for (const auto& [t, S] : side)
      if (t == leaf) return S;
    throw error("q_condition: no side tree for leaf " + leaf.str());
  }
};

// The height-0 condition over a single side tree.
inline q_condition q_root(lazy_tree S) {
  return q_condition{0,
                     finite_tree::from_nodes(width_t::binary, {node::root()}),
                     {{node::root(), std::move(S)}}};
}

// Trees the generic run must stay clear of, with the depth to which side
// trees are certified against them. Certificates are finite evidence, so
// membership in the good family is always "certified to this depth".
struct forbidden_list {
  std::vector<lazy_tree> trees;
  std::size_t depth = 16;
};

struct q_verdict {
  bool ok = false;
  std::vector<std::string> violations;
  std::vector<incompatibility_certificate> certificates;
};

namespace detail {

// Leftmost extension of u inside S up to the target level.
inline node extend_leftmost(const lazy_tree& S, node u, std::size_t level) {
  while (u.size() < level) {
    std::vector<std::uint32_t> cs = S.children(u);
    if (cs.empty())
      throw validation_error("side tree dead-ends at node " + u.str());
    u = u.child(cs.front());
  }
  return u;
}

// First node at or above t where S ramifies, scanning the single chain
// until the horizon.
inline std::optional<node> first_split_at_or_above(const lazy_tree& S, node t,
                                                   std::size_t horizon) {
  while (t.size() < horizon) {
    std::vector<std::uint32_t> cs = S.children(t);
    if (cs.size() >= 2) return t;
    if (cs.empty())
      throw validation_error("side tree dead-ends at node " + t.str());
    t = t.child(cs.front());
  }
  return std::nullopt;
}

}  // namespace detail

// Check every structural invariant of a condition, plus one incompatibility
// certificate per side tree per forbidden tree (shared ramification must
// stay below half the certification depth). Violations are reported one
// clause at a time rather than as a single verdict.
inline q_verdict q_validate(const q_condition& c,
                            const forbidden_list& forbidden,
                            std::size_t node_budget = default_node_budget) {
  q_verdict v;
  if (c.F.width() != width_t::binary)
    v.violations.push_back("skeleton must have width 2");
  std::vector<node> leaves = c.F.leaves();
  for (const node& t : leaves)
    if (t.size() != c.n)
      v.violations.push_back("maximal skeleton node " + t.str() +
                             " not at height " + std::to_string(c.n));
  if (!is_skew(c.F)) v.violations.push_back("skeleton is not skew");

  std::vector<node> keys;
  for (const auto& [t, S] : c.side) keys.push_back(t);
  if (!std::is_sorted(keys.begin(), keys.end()))
    v.violations.push_back("side entries not sorted by leaf");
  if (keys != leaves)
    v.violations.push_back("side trees do not match the skeleton's leaves");

  for (const auto& [t, S] : c.side) {
    if (S.width() != width_t::binary) {
      v.violations.push_back("side tree of " + t.str() + " must have width 2");
      continue;
    }
    // Up to the condition's height the side tree is the chain of its leaf.
    node cur;
    for (std::size_t k = 0; k < c.n; ++k) {
      std::vector<std::uint32_t> cs = S.children(cur);
      if (cs.size() != 1 || cs[0] != t[k]) {
        v.violations.push_back("side tree of " + t.str() +
                               " does not run through its leaf at level " +
                               std::to_string(k));
        break;
      }
      cur = cur.child(cs[0]);
    }
    for (const lazy_tree& bad : forbidden.trees) {
      incompatibility_certificate cert = surgery::sacks_incompatibility(
          S, bad, forbidden.depth / 2, forbidden.depth, node_budget);
      if (!cert.passed())
        v.violations.push_back("side tree of " + t.str() +
                               " shares deep splits with forbidden tree '" +
                               bad.name() + "'");
      v.certificates.push_back(std::move(cert));
    }
  }
  v.ok = v.violations.empty();
  return v;
}

// The order: the stronger condition's skeleton restricts to the weaker one,
// and every old leaf has a new leaf above it whose side tree is the old
// side tree restricted there. Side-tree equality is identity of the
// presented object (same oracle, same cone), which is exactly what the
// extension operations below construct.
inline bool q_leq(const q_condition& weaker, const q_condition& stronger) {
  if (stronger.n < weaker.n) return false;
  if (!(truncate(stronger.F, weaker.n) == weaker.F)) return false;
  for (const auto& [t, S] : weaker.side) {
    bool found = false;
    for (const auto& [s, S1] : stronger.side) {
      if (!t.is_prefix_of(s)) continue;
      if (!S.contains(s)) continue;
      if (same_tree(S1.restrict_to(s), S.restrict_to(s))) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

// ---- the three extension moves ----

// Amalgamate two conditions that share a skeleton: every leaf picks a
// divergence level where one successor direction of its first side tree
// differs from one of its second, the levels staggered so the new skeleton
// stays skew; each leaf then contributes one branch into each input's side
// tree. The result is above both inputs in the order.
inline q_condition q_amalgamate(const q_condition& ci, const q_condition& cj,
                                std::size_t horizon = 64,
                                std::size_t node_budget = default_node_budget) {
  if (ci.n != cj.n || !(ci.F == cj.F))
    throw validation_error("q_amalgamate: conditions must share height and skeleton");

  struct choice {
    node at;            // common node where the branches part
    std::uint32_t left = 0;   // direction into ci's side tree
    std::uint32_t right = 0;  // direction into cj's side tree
  };
  std::vector<node> leaves = ci.F.leaves();
  std::vector<choice> picks(leaves.size());
  std::set<std::size_t> used_levels;

  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const node& t = leaves[k];
    const lazy_tree& Si = ci.side_for(t);
    const lazy_tree& Sj = cj.side_for(t);
    // Walk the common part of the two side trees level by level, looking
    // for the least unused level offering distinct directions.
    std::vector<node> frontier{t};
    std::size_t visited = 0;
    bool placed = false;
    for (std::size_t d = t.size(); d < horizon && !placed; ++d) {
      std::vector<node> next;
      for (const node& u : frontier) {
        if (++visited > node_budget)
          throw horizon_error("q_amalgamate: common-node frontier exceeds budget");
        std::vector<std::uint32_t> di = Si.children(u);
        std::vector<std::uint32_t> dj = Sj.children(u);
        if (!placed && !used_levels.count(d)) {
          bool diverge = false;
          std::uint32_t a = 0, b = 0;
          for (std::uint32_t x : di) {
            for (std::uint32_t y : dj)
              if (x != y) {
                a = x;
                b = y;
                diverge = true;
                break;
              }
            if (diverge) break;
          }
          if (diverge) {
            picks[k] = choice{u, a, b};
            used_levels.insert(d);
            placed = true;
            break;
          }
        }
        for (std::uint32_t x : di)
          if (std::find(dj.begin(), dj.end(), x) != dj.end())
            next.push_back(u.child(x));
      }
      frontier = std::move(next);
      if (frontier.empty()) break;
    }
    if (!placed)
      throw validation_error(
          "q_amalgamate: no usable divergence level for leaf " + t.str() +
          " within the horizon");
  }

  std::size_t n_star = 0;
  for (const choice& c : picks) n_star = std::max(n_star, c.at.size() + 1);

  std::vector<node> seeds = ci.F.nodes();
  std::vector<std::pair<node, lazy_tree>> side;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const node& t = leaves[k];
    const lazy_tree& Si = ci.side_for(t);
    const lazy_tree& Sj = cj.side_for(t);
    node l = detail::extend_leftmost(Si, picks[k].at.child(picks[k].left), n_star);
    node r = detail::extend_leftmost(Sj, picks[k].at.child(picks[k].right), n_star);
    seeds.push_back(l);
    seeds.push_back(r);
    side.emplace_back(l, Si.restrict_to(l));
    side.emplace_back(r, Sj.restrict_to(r));
  }
  std::sort(side.begin(), side.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return q_condition{n_star, finite_tree::closure(width_t::binary, seeds),
                     std::move(side)};
}

// Extend a condition so the chosen leaf ramifies: walk its side tree to the
// first split at or above the leaf, branch both ways there, and pull every
// other leaf up along its leftmost branch. One split is added, at a level
// no earlier split occupies, so the skeleton stays skew.
inline q_condition q_ensure_compatible(const q_condition& c, const node& t0,
                                       std::size_t horizon = 64) {
  std::vector<node> leaves = c.F.leaves();
  if (std::find(leaves.begin(), leaves.end(), t0) == leaves.end())
    throw validation_error("q_ensure_compatible: " + t0.str() +
                           " is not a leaf of the skeleton");
  const lazy_tree& S0 = c.side_for(t0);
  std::optional<node> split = detail::first_split_at_or_above(S0, t0, horizon);
  if (!split)
    throw validation_error("q_ensure_compatible: side tree of " + t0.str() +
                           " does not split within the horizon");
  std::size_t n1 = split->size() + 1;

  std::vector<node> seeds = c.F.nodes();
  std::vector<std::pair<node, lazy_tree>> side;
  std::vector<std::uint32_t> dirs = S0.children(*split);
  for (std::uint32_t d : dirs) {
    node branch = detail::extend_leftmost(S0, split->child(d), n1);
    seeds.push_back(branch);
    side.emplace_back(branch, S0.restrict_to(branch));
  }
  for (const node& t : leaves) {
    if (t == t0) continue;
    const lazy_tree& S = c.side_for(t);
    node up = detail::extend_leftmost(S, t, n1);
    seeds.push_back(up);
    side.emplace_back(up, S.restrict_to(up));
  }
  std::sort(side.begin(), side.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return q_condition{n1, finite_tree::closure(width_t::binary, seeds),
                     std::move(side)};
}

// Extend every leaf past the forbidden tree: each side tree is scanned
// upward for its least level carrying a node outside T_alpha (breadth
// first, lexicographically least escape at that level), and all branches
// are then pulled up to the maximal escape level. Extensions of an escaped
// node stay escaped, because membership is closed under prefixes.
inline q_condition q_avoid(const q_condition& c, const lazy_tree& T_alpha,
                           std::size_t horizon = 64,
                           std::size_t node_budget = default_node_budget) {
  std::vector<node> leaves = c.F.leaves();
  std::vector<node> escapes;
  for (const node& t : leaves) {
    const lazy_tree& S = c.side_for(t);
    std::optional<node> found;
    std::vector<node> frontier{t};
    std::size_t visited = 0;
    for (std::size_t d = t.size(); d <= horizon && !found; ++d) {
      for (const node& u : frontier) {
        if (++visited > node_budget)
          throw horizon_error("q_avoid: escape frontier exceeds budget");
        if (!T_alpha.contains(u)) {
          found = u;  // frontier is in lex order, first hit is least
          break;
        }
      }
      if (found) break;
      std::vector<node> next;
      for (const node& u : frontier)
        for (std::uint32_t x : S.children(u)) next.push_back(u.child(x));
      frontier = std::move(next);
      if (frontier.empty()) break;
    }
    if (!found)
      throw validation_error("q_avoid: no node of the side tree of " +
                             t.str() + " escapes '" + T_alpha.name() +
                             "' within the horizon");
    escapes.push_back(*found);
  }

  std::size_t n_star = c.n;
  for (const node& e : escapes) n_star = std::max(n_star, e.size());

  std::vector<node> seeds = c.F.nodes();
  std::vector<std::pair<node, lazy_tree>> side;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const lazy_tree& S = c.side_for(leaves[k]);
    node up = detail::extend_leftmost(S, escapes[k], n_star);
    seeds.push_back(up);
    side.emplace_back(up, S.restrict_to(up));
  }
  std::sort(side.begin(), side.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return q_condition{n_star, finite_tree::closure(width_t::binary, seeds),
                     std::move(side)};
}

// ---- scheduled runs ----

enum class q_task_kind : std::uint8_t { grow_split, ensure_compatible, avoid };

inline const char* q_task_name(q_task_kind k) {
  switch (k) {
    case q_task_kind::grow_split: return "grow-split";
    case q_task_kind::ensure_compatible: return "ensure-compatible";
    case q_task_kind::avoid: return "avoid";
  }
  return "?";
}

// Picks the leaf a task acts on once the condition it applies to is known.
struct leaf_selector {
  enum class kind : std::uint8_t { first, last, index } which = kind::first;
  std::size_t index = 0;

  node resolve(const q_condition& c) const {
    std::vector<node> leaves = c.F.leaves();
    switch (which) {
      case kind::first: return leaves.front();
      case kind::last: return leaves.back();
      case kind::index:
        if (index >= leaves.size())
          throw validation_error("leaf selector index " +
                                 std::to_string(index) + " out of range");
        return leaves[index];
    }
    throw error("leaf_selector: unreachable");
  }
};

struct q_task {
  q_task_kind kind = q_task_kind::ensure_compatible;
  leaf_selector leaf;           // for the two splitting tasks
  std::size_t forbidden_index = 0;  // for avoid
};

struct q_trace_entry {
  std::string label;
  q_condition after;
};

struct q_run_result {
  bool ok = false;
  std::string error;
  q_condition last;  // the deepest condition reached
  std::vector<q_trace_entry> trace;
  // One entry per executed avoid step: every skeleton node strictly above
  // the recorded height must stay outside the avoided tree.
  struct avoid_check {
    std::size_t forbidden_index = 0;
    std::size_t height = 0;
    bool clean = false;
  };
  std::vector<avoid_check> avoid_checks;
};

// Fold a schedule over a seed condition. A failing step aborts the run and
// leaves the trace of the completed prefix; afterwards every avoid step is
// re-checked against the final skeleton. The grow-split task is the same
// move as ensure-compatible under another name; both appear in traces under
// their own labels.
inline q_run_result q_generic_run(const q_condition& seed,
                                  const forbidden_list& forbidden,
                                  const std::vector<q_task>& schedule,
                                  std::size_t horizon = 64) {
  q_run_result res{true, "", seed, {}, {}};
  for (const q_task& task : schedule) {
    try {
      std::string label = q_task_name(task.kind);
      switch (task.kind) {
        case q_task_kind::grow_split:
        case q_task_kind::ensure_compatible: {
          node leaf = task.leaf.resolve(res.last);
          res.last = q_ensure_compatible(res.last, leaf, horizon);
          label += "@" + leaf.str();
          break;
        }
        case q_task_kind::avoid: {
          if (task.forbidden_index >= forbidden.trees.size())
            throw validation_error("avoid: forbidden index " +
                                   std::to_string(task.forbidden_index) +
                                   " out of range");
          res.last = q_avoid(res.last, forbidden.trees[task.forbidden_index],
                             horizon);
          label += "#" + std::to_string(task.forbidden_index);
          res.avoid_checks.push_back(
              {task.forbidden_index, res.last.n, false});
          break;
        }
      }
      res.trace.push_back(q_trace_entry{label, res.last});
    } catch (const std::exception& e) {
      res.ok = false;
      res.error = e.what();
      break;
    }
  }
  for (auto& check : res.avoid_checks) {
    check.clean = true;
    const lazy_tree& bad = forbidden.trees[check.forbidden_index];
    for (const node& t : res.last.F.nodes())
      if (t.size() > check.height && bad.contains(t)) check.clean = false;
  }
  return res;
}

}  // namespace treeforge::qforcing
