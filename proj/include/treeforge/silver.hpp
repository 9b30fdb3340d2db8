#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "treeforge/baire.hpp"
#include "treeforge/core.hpp"
#include "treeforge/finite_tree.hpp"
#include "treeforge/node.hpp"
#include "treeforge/surgery.hpp"

namespace treeforge::surgery {

// A uniform partial 0/1 assignment: positions in `free` are undecided,
// every other position carries the bit `fixed` assigns to it. The free set
// is presented by enumeration, so conditions stay desk-sized no matter how
// sparse they are.
struct silver_condition {
  enumerated_set free;
  std::function<bool(std::uint64_t)> fixed;
  std::string name = "silver";

  static silver_condition zeros(enumerated_set free_set,
                                std::string name = "silver") {
    return silver_condition{std::move(free_set),
                            [](std::uint64_t) { return false; },
                            std::move(name)};
  }

  // Fixed bits listed by position; positions past the list default to 0.
  // Entries at free positions are simply never consulted.
  static silver_condition from_bits(enumerated_set free_set,
                                    std::vector<bool> bits,
                                    std::string name = "silver") {
    auto stored = std::make_shared<std::vector<bool>>(std::move(bits));
    return silver_condition{
        std::move(free_set),
        [stored](std::uint64_t pos) {
          return pos < stored->size() && (*stored)[pos];
        },
        std::move(name)};
  }
};

// The binary tree of all assignments the condition allows, cut at depth N:
// it ramifies exactly at the free positions below N and follows the fixed
// bit everywhere else.
inline finite_tree silver_to_tree(const silver_condition& p, std::size_t N) {
  std::vector<node> all{node::root()};
  std::vector<node> frontier{node::root()};
  for (std::size_t level = 0; level < N; ++level) {
    bool is_free = p.free.contains(level);
    std::uint32_t bit = p.fixed(level) ? 1 : 0;
    std::vector<node> next;
    for (const node& t : frontier) {
      if (is_free) {
        next.push_back(t.child(0));
        next.push_back(t.child(1));
      } else {
        next.push_back(t.child(bit));
      }
    }
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return finite_tree::from_nodes(width_t::binary, std::move(all));
}

// Thin a condition to its permitted positions: the free set shrinks to the
// positions the coloring permits (the low region plus one sub-block per
// family), and every newly decided position is fixed to 0. Each enforced
// family must still catch the old free set inside its selected sub-block;
// a family that misses it is an error naming it.
//
// The thinned free set is enumerated by filtering the old one, and the
// filter may in principle never find its next element; the scan cap turns
// that into a horizon error instead of a hang.
inline silver_condition silver_thin(const silver_condition& p,
                                    const value_plan& plan,
                                    std::uint64_t scan_cap = 4096) {
  std::vector<interval> blocks = detail::enforced_blocks(plan);
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (p.free.count_in(blocks[k].lo, blocks[k].hi) == 0)
      throw validation_error("silver_thin: enforced family " +
                             std::to_string(plan.enforced[k]) +
                             " misses the free set of " + p.name);

  enumerated_set old_free = p.free;
  enumerated_set X = plan.X;
  coloring h = plan.h;
  enumerated_set new_free = enumerated_set::from_function(
      [old_free, X, h, scan_cap](std::uint64_t n) -> std::uint64_t {
        enumerated_set::cursor c(old_free);
        std::uint64_t seen = 0;
        for (std::uint64_t scanned = 0; scanned < scan_cap; ++scanned) {
          std::uint64_t v = c.next();
          if (!split_permitted(X, h, v)) continue;
          if (seen == n) return v;
          ++seen;
        }
        throw horizon_error(
            "silver_thin: no permitted free position within the scan cap");
      },
      "thinned:" + p.free.name() + ":" + plan.h.name());

  std::function<bool(std::uint64_t)> old_fixed = p.fixed;
  std::function<bool(std::uint64_t)> new_fixed =
      [old_free, old_fixed](std::uint64_t pos) {
        if (old_free.contains(pos)) return false;  // newly decided, to 0
        return old_fixed(pos);
      };
  return silver_condition{std::move(new_free), std::move(new_fixed),
                          "thinned:" + p.name};
}

// Level-based certificate on the materialized assignment trees, exactly as
// for perfect binary conditions.
inline incompatibility_certificate silver_incompatibility(
    const silver_condition& p, const silver_condition& q,
    std::uint64_t divergence_level, std::size_t depth) {
  return incompat_of_truncations(silver_to_tree(p, depth),
                                 silver_to_tree(q, depth), divergence_level,
                                 depth, forcing_kind::silver);
}

}  // namespace treeforge::surgery
