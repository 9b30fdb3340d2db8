#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "treeforge/core.hpp"

namespace treeforge {

// A finite sequence of naturals, read as a path from the root of a tree.
// Entries of binary trees are 0/1; omega trees allow any value. All the
// deterministic "leftmost" choices in the library mean lexicographic order
// on these sequences, where a proper prefix sorts before its extensions.
class node {
 public:
  node() = default;
  node(std::initializer_list<std::uint32_t> entries) : entries_(entries) {}
  explicit node(std::vector<std::uint32_t> entries)
      : entries_(std::move(entries)) {}

  static node root() { return node{}; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::uint32_t operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<std::uint32_t>& entries() const { return entries_; }

  bool is_prefix_of(const node& other) const {
    if (size() > other.size()) return false;
    return std::equal(entries_.begin(), entries_.end(),
                      other.entries_.begin());
  }

  bool is_strict_prefix_of(const node& other) const {
    return size() < other.size() && is_prefix_of(other);
  }

  bool comparable_with(const node& other) const {
    return is_prefix_of(other) || other.is_prefix_of(*this);
  }

  node prefix(std::size_t len) const {
    if (len > size()) throw error("node::prefix: length exceeds node size");
    return node(std::vector<std::uint32_t>(entries_.begin(),
                                           entries_.begin() + len));
  }

  node parent() const {
    if (empty()) throw error("node::parent: root has no parent");
    return prefix(size() - 1);
  }

  node child(std::uint32_t v) const {
    std::vector<std::uint32_t> e = entries_;
    e.push_back(v);
    return node(std::move(e));
  }

  std::uint32_t last() const {
    if (empty()) throw error("node::last: root has no entries");
    return entries_.back();
  }

  friend bool operator==(const node&, const node&) = default;
  friend auto operator<=>(const node& a, const node& b) {
    return std::lexicographical_compare_three_way(
        a.entries_.begin(), a.entries_.end(), b.entries_.begin(),
        b.entries_.end());
  }

  // Compact rendering: binary nodes as bit strings, anything else
  // comma-separated. The root prints as "e".
  std::string str() const {
    if (empty()) return "e";
    bool binary = std::all_of(entries_.begin(), entries_.end(),
                              [](std::uint32_t v) { return v < 2; });
    std::ostringstream out;
    if (binary) {
      for (std::uint32_t v : entries_) out << v;
    } else {
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i) out << ',';
        out << entries_[i];
      }
    }
    return out.str();
  }

  friend std::ostream& operator<<(std::ostream& os, const node& n) {
    return os << n.str();
  }

 private:
  std::vector<std::uint32_t> entries_;
};

}  // namespace treeforge
