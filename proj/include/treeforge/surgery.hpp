#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treeforge/baire.hpp"
#include "treeforge/core.hpp"
#include "treeforge/finite_tree.hpp"
#include "treeforge/lazy_tree.hpp"
#include "treeforge/node.hpp"
#include "treeforge/orders.hpp"

namespace treeforge::surgery {

using baire::enumerated_set;
using baire::interval;
using baire::pow2;

// A sub-block selector: h(i) < 2^i picks one sub-block per dyadic family.
// h(0) is forced to 0.
class coloring {
 public:
  static coloring from_function(std::function<std::uint64_t(std::uint64_t)> h,
                                std::string name = "h") {
    return coloring(std::move(h), std::move(name));
  }

  // h(i) = alpha mod 2^i. Two of these with distinct parameters disagree at
  // every family i with 2^i > max(alpha, beta).
  static coloring modular(std::uint64_t alpha) {
    return coloring(
        [alpha](std::uint64_t i) {
          return i >= 63 ? alpha : (alpha & (pow2(i) - 1));
        },
        "mod:" + std::to_string(alpha));
  }

  static coloring explicit_prefix(std::vector<std::uint64_t> values,
                                  std::string name = "explicit") {
    auto vals = std::make_shared<std::vector<std::uint64_t>>(std::move(values));
    return coloring(
        [vals](std::uint64_t i) -> std::uint64_t {
          if (i >= vals->size())
            throw horizon_error("coloring: explicit prefix exhausted at " +
                                std::to_string(i));
          return (*vals)[i];
        },
        std::move(name));
  }

  std::uint64_t at(std::uint64_t i) const {
    std::uint64_t v = fn_(i);
    if (i < 63 && v >= pow2(i))
      throw validation_error("coloring '" + name_ + "': value " +
                             std::to_string(v) + " out of range at family " +
                             std::to_string(i));
    return v;
  }

  const std::string& name() const { return name_; }

 private:
  coloring(std::function<std::uint64_t(std::uint64_t)> fn, std::string name)
      : fn_(std::move(fn)), name_(std::move(name)) {}
  std::function<std::uint64_t(std::uint64_t)> fn_;
  std::string name_;
};

inline std::vector<coloring> ev_diff_family(std::size_t count) {
  std::vector<coloring> out;
  out.reserve(count);
  for (std::size_t a = 0; a < count; ++a)
    out.push_back(coloring::modular(a));
  return out;
}

// Least i with 2^i > max(alpha, beta); the modular pair disagrees at every
// family from here on.
inline std::uint64_t divergence_index(std::uint64_t alpha, std::uint64_t beta) {
  std::uint64_t mx = std::max(alpha, beta);
  std::uint64_t i = 0;
  while (pow2(i) <= mx) ++i;
  return i;
}

// ---- level bookkeeping against an enumerated set ----

struct window_ref {
  std::uint64_t family = 0;     // i
  std::uint64_t sub_block = 0;  // j < 2^i
  interval span;
};

// Which dyadic sub-block a level falls into; nothing for the low region
// below mu(1).
inline std::optional<window_ref> locate_window(const enumerated_set& X,
                                               std::uint64_t level) {
  enumerated_set::cursor c(X);
  std::uint64_t mu0 = c.next();
  std::uint64_t mu1 = c.next();
  (void)mu0;
  if (level < mu1) return std::nullopt;
  std::uint64_t m = 1;
  std::uint64_t lo = mu1;
  for (;;) {
    std::uint64_t hi = c.next();
    if (level < hi) {
      std::uint64_t i = 0;
      while (pow2(i + 1) <= m) ++i;
      return window_ref{i, m - pow2(i), interval{lo, hi}};
    }
    lo = hi;
    ++m;
  }
}

// A level may carry splits iff it lies below mu(1) or inside the selected
// sub-block of its family.
inline bool split_permitted(const enumerated_set& X, const coloring& h,
                            std::uint64_t level) {
  std::optional<window_ref> w = locate_window(X, level);
  if (!w) return true;
  return h.at(w->family) == w->sub_block;
}

// ---- the weakly-obeys predicate and its per-family certificate ----

struct obey_report {
  bool holds = false;
  // start node at a sub-block boundary -> ramifying descendant inside it
  std::vector<std::pair<node, node>> witnesses;
  std::vector<node> failures;
};

namespace detail {
inline obey_report obeys_on_truncation(const finite_tree& cut,
                                       const enumerated_set& X,
                                       std::uint64_t i, ramify_mode mode) {
  obey_report rep;
  rep.holds = true;
  for (std::uint64_t j = 0; j < pow2(i); ++j) {
    interval b = baire::block(X, i, j);
    for (const node& t : cut.at_level(b.lo)) {
      std::optional<node> w = ramifies_below(cut, t, b.hi, mode);
      if (w) {
        rep.witnesses.emplace_back(t, *w);
      } else {
        rep.holds = false;
        rep.failures.push_back(t);
      }
    }
  }
  return rep;
}
}  // namespace detail

// Every node at the boundary of every sub-block of family i ramifies before
// the sub-block ends. Materializes the tree to the family's end, so the
// cost is the size of that truncation.
inline obey_report sacks_weakly_obeys_at(const lazy_tree& T,
                                         const enumerated_set& X,
                                         std::uint64_t i, ramify_mode mode,
                                         std::size_t node_budget = default_node_budget) {
  if (T.width() != width_t::binary)
    throw error("sacks_weakly_obeys_at: width-2 trees only");
  finite_tree cut = truncate(T, X.mu(pow2(i + 1)), 2, node_budget);
  return detail::obeys_on_truncation(cut, X, i, mode);
}

inline std::vector<std::uint64_t> good_blocks(const lazy_tree& T,
                                              const enumerated_set& X,
                                              std::uint64_t i_max,
                                              ramify_mode mode,
                                              std::size_t node_budget = default_node_budget) {
  if (T.width() != width_t::binary)
    throw error("good_blocks: width-2 trees only");
  finite_tree cut = truncate(T, X.mu(pow2(i_max + 1)), 2, node_budget);
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i <= i_max; ++i)
    if (detail::obeys_on_truncation(cut, X, i, mode).holds) out.push_back(i);
  return out;
}

// ---- thinning ----

enum class low_policy : std::uint8_t { keep, leftmost };

struct thin_plan {
  enumerated_set X;
  coloring h;
  std::vector<std::uint64_t> enforced;  // family indices, strictly increasing
  low_policy low = low_policy::keep;
};

namespace detail {

// First ramification point of T on the chain above s; the subtree above s
// is a single chain until that point, so this is a plain walk. Returns
// nothing if no split occurs strictly before level `end`.
inline std::optional<node> first_split_before(const lazy_tree& T, node s,
                                              std::uint64_t end) {
  while (s.size() < end) {
    std::vector<std::uint32_t> cs = T.children(s);
    if (cs.empty())
      throw validation_error("thinning: dead end at node " + s.str());
    if (cs.size() >= 2) return s;
    s = s.child(cs[0]);
  }
  return std::nullopt;
}

}  // namespace detail

// Thin a binary tree down to the plan: below mu(1) the low policy applies;
// inside the selected sub-block of each enforced family every surviving
// node at the sub-block boundary keeps the earliest split the base tree
// offers there (both children at that split); everywhere else exactly one
// child survives, the lexicographically least. The result is lazy and pure;
// it ramifies only in enforced sub-blocks plus (under `keep`) the low
// region, so its splitting certificate is only meaningful up to the last
// enforced block.
//
// Before returning, the surviving skeleton is walked to the end of the last
// enforced sub-block. A branch whose enforced block offers no split in the
// base tree fails here, naming the family and the node; walking the thinned
// tree stays cheap even where materializing the base tree would not.
inline lazy_tree sacks_thin(const lazy_tree& T, const thin_plan& plan,
                            std::size_t node_budget = default_node_budget) {
  if (T.width() != width_t::binary)
    throw error("sacks_thin: width-2 trees only");
  for (std::size_t k = 0; k + 1 < plan.enforced.size(); ++k)
    if (plan.enforced[k] >= plan.enforced[k + 1])
      throw validation_error("sacks_thin: enforced families must be strictly increasing");

  enumerated_set X = plan.X;
  coloring h = plan.h;
  std::vector<std::uint64_t> enforced = plan.enforced;
  low_policy low = plan.low;
  lazy_tree base = T;

  auto children = [X, h, enforced, low, base](
                      const node& t, std::uint64_t) -> std::vector<std::uint32_t> {
    std::vector<std::uint32_t> raw = base.children(t);
    if (raw.empty())
      throw validation_error("thinned tree: dead end at node " + t.str());
    std::optional<window_ref> w = locate_window(X, t.size());
    if (!w) {
      if (low == low_policy::keep) return raw;
      return {raw.front()};
    }
    bool is_enforced = std::binary_search(enforced.begin(), enforced.end(),
                                          w->family);
    if (!is_enforced || h.at(w->family) != w->sub_block)
      return {raw.front()};
    node anchor = t.prefix(std::size_t(w->span.lo));
    std::optional<node> split =
        detail::first_split_before(base, anchor, w->span.hi);
    if (!split)
      throw validation_error("thinned tree: enforced family " +
                             std::to_string(w->family) +
                             " has no split above node " + anchor.str());
    if (t.is_strict_prefix_of(*split)) return {(*split)[t.size()]};
    if (t == *split) return raw;
    if (split->is_strict_prefix_of(t)) return {raw.front()};
    throw error("thinned tree: query outside the thinned branch at " + t.str());
  };

  // Guaranteed splits sit in enforced sub-blocks only, so the certificate
  // gap spans from one enforced sub-block start to the end of the next.
  std::size_t horizon_gap = std::size_t(1) << 30;
  if (!enforced.empty()) {
    std::uint64_t worst = 0;
    std::uint64_t prev_start = 0;
    for (std::size_t k = 0; k < enforced.size(); ++k) {
      interval b = baire::block(X, enforced[k], h.at(enforced[k]));
      worst = std::max(worst, b.hi - prev_start);
      prev_start = b.lo;
    }
    horizon_gap = std::size_t(worst) + 1;
  }

  lazy_tree out(width_t::binary, std::move(children),
                splitting_bound::constant(horizon_gap),
                "thinned:" + base.name() + ":" + plan.h.name());
  if (!plan.enforced.empty()) {
    interval last =
        baire::block(plan.X, plan.enforced.back(), plan.h.at(plan.enforced.back()));
    truncate(out, std::size_t(last.hi), 2, node_budget);
  }
  return out;
}

// ---- incompatibility certificates ----

enum class forcing_kind : std::uint8_t { sacks, laver, miller, silver };

inline const char* forcing_kind_name(forcing_kind k) {
  switch (k) {
    case forcing_kind::sacks: return "sacks";
    case forcing_kind::laver: return "laver";
    case forcing_kind::miller: return "miller";
    case forcing_kind::silver: return "silver";
  }
  return "?";
}

struct shared_split {
  node at;
  std::uint64_t level = 0;
  friend bool operator==(const shared_split&, const shared_split&) = default;
};

// Finite evidence that two conditions have no common strengthening: for
// Sacks/Silver, all ramification of the intersection happens strictly below
// the divergence level; for Laver/Miller, no intersection node keeps two
// successor values at or above it. `shared` is the benign evidence below
// divergence, `violations` anything that breaks the claim. Everything is
// relative to the stated depth (and value bound, when branching is by
// value), never absolute.
struct incompatibility_certificate {
  forcing_kind kind = forcing_kind::sacks;
  std::uint64_t divergence_level = 0;
  std::size_t checked_to = 0;
  std::optional<std::uint64_t> value_bound;
  std::vector<shared_split> shared;
  std::vector<shared_split> violations;
  bool passed() const { return violations.empty(); }
};

// Level-based certificate from two materialized trees.
inline incompatibility_certificate incompat_of_truncations(
    const finite_tree& A, const finite_tree& B, std::uint64_t divergence_level,
    std::size_t depth, forcing_kind kind) {
  finite_tree common = intersect(truncate(A, depth), truncate(B, depth));
  incompatibility_certificate cert;
  cert.kind = kind;
  cert.divergence_level = divergence_level;
  cert.checked_to = depth;
  for (const node& t : ramification_points(common)) {
    shared_split s{t, t.size()};
    if (t.size() < divergence_level)
      cert.shared.push_back(s);
    else
      cert.violations.push_back(s);
  }
  return cert;
}

inline incompatibility_certificate sacks_incompatibility(
    const lazy_tree& A, const lazy_tree& B, std::uint64_t divergence_level,
    std::size_t depth, std::size_t node_budget = default_node_budget) {
  return incompat_of_truncations(truncate(A, depth, 2, node_budget),
                                 truncate(B, depth, 2, node_budget),
                                 divergence_level, depth,
                                 forcing_kind::sacks);
}

// ---- antichain assembly ----

struct antichain_result {
  std::vector<lazy_tree> conditions;
  std::vector<thin_plan> plans;
  struct pair_certificate {
    std::size_t a = 0;
    std::size_t b = 0;
    incompatibility_certificate cert;
  };
  std::vector<pair_certificate> certificates;
  bool all_passed() const {
    return std::all_of(certificates.begin(), certificates.end(),
                       [](const pair_certificate& p) { return p.cert.passed(); });
  }
};

// Assign the modular colorings to the inputs, thin each tree over all of
// its good families up to i_max, and certify every pair at the divergence
// level of its coloring pair. An input with no good family is an error
// naming its position.
inline antichain_result antichain_build(const enumerated_set& X,
                                        const std::vector<lazy_tree>& trees,
                                        std::uint64_t i_max, std::size_t depth,
                                        std::size_t node_budget = default_node_budget) {
  antichain_result out;
  std::vector<coloring> hs = ev_diff_family(trees.size());
  for (std::size_t a = 0; a < trees.size(); ++a) {
    std::vector<std::uint64_t> good =
        good_blocks(trees[a], X, i_max, ramify_mode::inclusive, node_budget);
    if (good.empty())
      throw validation_error("antichain_build: input " + std::to_string(a) +
                             " has no good family up to " +
                             std::to_string(i_max));
    thin_plan plan{X, hs[a], good, low_policy::keep};
    out.conditions.push_back(sacks_thin(trees[a], plan, node_budget));
    out.plans.push_back(std::move(plan));
  }
  for (std::size_t a = 0; a < trees.size(); ++a)
    for (std::size_t b = a + 1; b < trees.size(); ++b) {
      std::uint64_t div = X.mu(pow2(divergence_index(a, b)));
      out.certificates.push_back({a, b,
                                  sacks_incompatibility(out.conditions[a],
                                                        out.conditions[b], div,
                                                        depth, node_budget)});
    }
  return out;
}

}  // namespace treeforge::surgery
