#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treeforge/core.hpp"

namespace treeforge::namecraft {

// A finite poset over string-labelled elements. The relation handed to
// from_relation must already be reflexive, antisymmetric and transitive;
// closure_of instead completes an arbitrary relation (adding reflexive
// pairs and transitive consequences) and then insists on antisymmetry.
class finite_poset {
 public:
  static finite_poset from_relation(
      std::vector<std::string> elements,
      const std::vector<std::pair<std::string, std::string>>& pairs) {
    finite_poset P(std::move(elements), pairs);
    for (std::size_t a = 0; a < P.size(); ++a)
      if (!P.mat_[a][a])
        throw validation_error("poset relation misses reflexive pair for '" +
                               P.elements_[a] + "'");
    P.check_antisymmetry();
    for (std::size_t a = 0; a < P.size(); ++a)
      for (std::size_t b = 0; b < P.size(); ++b)
        for (std::size_t c = 0; c < P.size(); ++c)
          if (P.mat_[a][b] && P.mat_[b][c] && !P.mat_[a][c])
            throw validation_error("poset relation is not transitive: '" +
                                   P.elements_[a] + "' <= '" + P.elements_[b] +
                                   "' <= '" + P.elements_[c] + "'");
    return P;
  }

  static finite_poset closure_of(
      std::vector<std::string> elements,
      const std::vector<std::pair<std::string, std::string>>& pairs) {
    finite_poset P(std::move(elements), pairs);
    for (std::size_t a = 0; a < P.size(); ++a) P.mat_[a][a] = true;
    for (std::size_t b = 0; b < P.size(); ++b)
      for (std::size_t a = 0; a < P.size(); ++a)
        if (P.mat_[a][b])
          for (std::size_t c = 0; c < P.size(); ++c)
            if (P.mat_[b][c]) P.mat_[a][c] = true;
    P.check_antisymmetry();
    return P;
  }

  const std::vector<std::string>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }

  bool leq(const std::string& a, const std::string& b) const {
    return mat_[index_of(a)][index_of(b)];
  }

  // Compatibility in the forcing sense read upward: some element extends both.
  bool compatible(const std::string& a, const std::string& b) const {
    std::size_t ia = index_of(a), ib = index_of(b);
    for (std::size_t r = 0; r < size(); ++r)
      if (mat_[ia][r] && mat_[ib][r]) return true;
    return false;
  }

 private:
  finite_poset(std::vector<std::string> elements,
               const std::vector<std::pair<std::string, std::string>>& pairs)
      : elements_(std::move(elements)) {
    std::sort(elements_.begin(), elements_.end());
    if (std::adjacent_find(elements_.begin(), elements_.end()) !=
        elements_.end())
      throw validation_error("poset elements must be distinct");
    for (std::size_t i = 0; i < elements_.size(); ++i)
      index_[elements_[i]] = i;
    mat_.assign(size(), std::vector<bool>(size(), false));
    for (const auto& [a, b] : pairs) mat_[index_of(a)][index_of(b)] = true;
  }

  void check_antisymmetry() const {
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b = a + 1; b < size(); ++b)
        if (mat_[a][b] && mat_[b][a])
          throw validation_error("poset relation is not antisymmetric: '" +
                                 elements_[a] + "' and '" + elements_[b] + "'");
  }

  std::size_t index_of(const std::string& e) const {
    auto it = index_.find(e);
    if (it == index_.end())
      throw error("unknown poset element '" + e + "'");
    return it->second;
  }

  std::vector<std::string> elements_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<bool>> mat_;
};

// Antichains here are strong: members are pairwise incomparable and share
// no common extension at all.
inline void validate_antichain(const finite_poset& P,
                               const std::vector<std::string>& A) {
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = i + 1; j < A.size(); ++j) {
      if (P.leq(A[i], A[j]) || P.leq(A[j], A[i]))
        throw validation_error("antichain members '" + A[i] + "' and '" +
                               A[j] + "' are comparable");
      if (P.compatible(A[i], A[j]))
        throw validation_error("antichain members '" + A[i] + "' and '" +
                               A[j] + "' have a common extension");
    }
}

inline void validate_antichain_family(
    const finite_poset& P, const std::vector<std::vector<std::string>>& fam) {
  for (const auto& A : fam) validate_antichain(P, A);
}

// An element is large for an antichain when enough of the antichain sits
// above it. The threshold stands in for the full-size extension count the
// infinite statement demands.
inline std::size_t extensions_in(const finite_poset& P,
                                 const std::vector<std::string>& A,
                                 const std::string& p) {
  std::size_t k = 0;
  for (const std::string& q : A)
    if (P.leq(p, q)) ++k;
  return k;
}

struct star_result {
  std::map<std::string, std::size_t> witness;  // element -> least antichain index
  std::vector<std::string> unwitnessed;
  bool fully_witnessed() const { return unwitnessed.empty(); }
};

// For each element, the least antichain of the family holding at least
// threshold-many extensions of it.
inline star_result verify_star(const finite_poset& P,
                               const std::vector<std::vector<std::string>>& fam,
                               const std::vector<std::string>& targets,
                               std::size_t large_threshold) {
  if (large_threshold < targets.size())
    throw validation_error("verify_star: threshold below target count");
  validate_antichain_family(P, fam);
  star_result res;
  for (const std::string& p : P.elements()) {
    bool hit = false;
    for (std::size_t z = 0; z < fam.size(); ++z)
      if (extensions_in(P, fam[z], p) >= large_threshold) {
        res.witness[p] = z;
        hit = true;
        break;
      }
    if (!hit) res.unwitnessed.push_back(p);
  }
  return res;
}

// Greedy assignment realizing every target above every large element.
// Pairs (large element, target) are walked in lexicographic order, each
// consuming the least still-free antichain member above its element; the
// leftovers all get the first target. Runs out of fresh members only when
// the counting precondition fails, and then names the starved pair.
inline std::map<std::string, std::string> build_phi(
    const finite_poset& P, const std::vector<std::string>& A,
    std::vector<std::string> targets, std::size_t large_threshold) {
  validate_antichain(P, A);
  if (targets.empty())
    throw validation_error("build_phi: no targets");
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  std::vector<std::string> large;
  for (const std::string& p : P.elements())
    if (extensions_in(P, A, p) >= large_threshold) large.push_back(p);

  std::vector<std::string> members = A;
  std::sort(members.begin(), members.end());
  std::map<std::string, std::string> phi;
  for (const std::string& p : large)
    for (const std::string& v : targets) {
      bool placed = false;
      for (const std::string& q : members) {
        if (phi.count(q) || !P.leq(p, q)) continue;
        phi[q] = v;
        placed = true;
        break;
      }
      if (!placed)
        throw validation_error("build_phi: no fresh antichain member above '" +
                               p + "' for target '" + v + "'");
    }
  for (const std::string& q : members)
    if (!phi.count(q)) phi[q] = targets.front();
  return phi;
}

// Exhaustive check of the contract build_phi promises: above every large
// element, every target is realized by some member's value.
inline bool check_phi(const finite_poset& P, const std::vector<std::string>& A,
                      const std::map<std::string, std::string>& phi,
                      const std::vector<std::string>& targets,
                      std::size_t large_threshold) {
  for (const std::string& q : A)
    if (!phi.count(q))
      throw validation_error("check_phi: assignment misses member '" + q + "'");
  for (const std::string& p : P.elements()) {
    if (extensions_in(P, A, p) < large_threshold) continue;
    for (const std::string& v : targets) {
      bool hit = false;
      for (const std::string& q : A)
        if (P.leq(p, q) && phi.at(q) == v) {
          hit = true;
          break;
        }
      if (!hit) return false;
    }
  }
  return true;
}

}  // namespace treeforge::namecraft
