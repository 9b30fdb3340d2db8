#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treeforge/core.hpp"
#include "treeforge/finite_tree.hpp"
#include "treeforge/node.hpp"

namespace treeforge {

// Conditions get stronger by shrinking: T <= T' iff T' is a subtree of T.
inline bool tree_leq(const finite_tree& T, const finite_tree& Tp) {
  if (T.width() != Tp.width())
    throw error("tree_leq: width mismatch");
  return std::includes(T.nodes().begin(), T.nodes().end(),
                       Tp.nodes().begin(), Tp.nodes().end());
}

// T <=_n T': besides tree_leq, every ramification point of T of rank <= n
// must survive into T'. membership asks for survival as a node only;
// preserve_split additionally requires it to still ramify in T'.
inline bool tree_leq_n(const finite_tree& T, const finite_tree& Tp,
                       std::size_t n, leqn_mode mode) {
  if (!tree_leq(T, Tp)) return false;
  for (const node& t : ramification_points_up_to_rank(T, n)) {
    if (!Tp.contains(t)) return false;
    if (mode == leqn_mode::preserve_split && !ramifies_in(Tp, t))
      return false;
  }
  return true;
}

struct fusion_report {
  // stabilized_at[k] is the least index s such that the set of rank-<=k
  // ramification points is the same for every tree from s on. The chain
  // precondition forces stabilized_at[k] <= k+1; the run verifies rather
  // than assumes this.
  std::vector<std::size_t> stabilized_at;
  finite_tree result;
};

// Finite fusion: given a chain T_0 <=_0 T_1 <=_1 T_2 ... (preserve_split
// mode, compared after truncating everything to depth), intersect the whole
// chain and certify that the rank-<=k ramification fronts stopped moving.
// A violated chain step throws, naming the offending index.
inline fusion_report stabilized_fusion(const std::vector<finite_tree>& seq,
                                       std::size_t depth) {
  if (seq.empty()) throw error("stabilized_fusion: empty sequence");
  std::vector<finite_tree> cut;
  cut.reserve(seq.size());
  for (const finite_tree& T : seq) cut.push_back(truncate(T, depth));

  for (std::size_t m = 0; m + 1 < cut.size(); ++m)
    if (!tree_leq_n(cut[m], cut[m + 1], m, leqn_mode::preserve_split))
      throw validation_error(
          "stabilized_fusion: chain precondition fails at index " +
          std::to_string(m));

  finite_tree fused = cut.back();
  for (std::size_t m = 0; m + 1 < cut.size(); ++m)
    fused = intersect(fused, cut[m]);

  std::size_t ranks = cut.size() >= 1 ? cut.size() - 1 : 0;
  std::vector<std::size_t> stabilized;
  for (std::size_t k = 0; k < ranks; ++k) {
    std::vector<std::vector<node>> fronts;
    fronts.reserve(cut.size());
    for (const finite_tree& T : cut)
      fronts.push_back(ramification_points_up_to_rank(T, k));
    std::size_t s = cut.size() - 1;
    while (s > 0 && fronts[s - 1] == fronts.back()) --s;
    if (s > k + 1)
      throw validation_error(
          "stabilized_fusion: rank-" + std::to_string(k) +
          " front still moving at index " + std::to_string(s));
    stabilized.push_back(s);
  }
  return fusion_report{std::move(stabilized), std::move(fused)};
}

}  // namespace treeforge
