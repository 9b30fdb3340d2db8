#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "treeforge/baire.hpp"
#include "treeforge/finite_tree.hpp"
#include "treeforge/laver.hpp"
#include "treeforge/node.hpp"
#include "treeforge/surgery.hpp"

namespace treeforge::io {

// Deterministic DOT text: one graph node per tree node in lex order, edges
// parent to child, ramification points double-circled. The optional label
// is printed as a graph caption (thinned trees put their enforced blocks
// there).
inline std::string to_dot(const finite_tree& T, const std::string& label = "") {
  const std::vector<node>& nodes = T.nodes();
  std::vector<node> rams = ramification_points(T);
  std::sort(rams.begin(), rams.end());

  std::ostringstream out;
  out << "digraph tree {\n  rankdir=TB;\n";
  if (!label.empty())
    out << "  label=\"" << label << "\";\n  labelloc=\"t\";\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    bool ram = std::binary_search(rams.begin(), rams.end(), nodes[i]);
    out << "  n" << i << " [label=\"" << nodes[i].str() << "\", shape="
        << (ram ? "doublecircle" : "circle") << "];\n";
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].empty()) continue;
    auto it = std::lower_bound(nodes.begin(), nodes.end(), nodes[i].parent());
    out << "  n" << (it - nodes.begin()) << " -> n" << i << ";\n";
  }
  out << "}\n";
  return out.str();
}

// Caption describing where a plan forces splits, e.g.
// "enforced 0:[1,2) 1:[2,4)".
inline std::string enforced_caption(const baire::enumerated_set& X,
                                    const surgery::coloring& h,
                                    const std::vector<std::uint64_t>& enforced) {
  std::ostringstream out;
  out << "enforced";
  for (std::uint64_t i : enforced) {
    baire::interval b = baire::block(X, i, h.at(i));
    out << " " << i << ":[" << b.lo << "," << b.hi << ")";
  }
  return out.str();
}

}  // namespace treeforge::io
