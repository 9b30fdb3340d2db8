#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treeforge/core.hpp"

namespace treeforge::baire {

// An infinite subset of the naturals, presented by its strictly increasing
// enumeration mu. Monotonicity is an obligation of the oracle; enumeration
// walks check it step by step and reject the offending index.
class enumerated_set {
 public:
  static enumerated_set from_function(std::function<std::uint64_t(std::uint64_t)> mu,
                                      std::string name = "set") {
    return enumerated_set(std::move(mu), std::move(name));
  }

  // mu(n) = a*n + b.
  static enumerated_set affine(std::uint64_t a, std::uint64_t b) {
    if (a == 0)
      throw validation_error("enumerated_set: affine step must be >= 1");
    return enumerated_set(
        [a, b](std::uint64_t n) { return a * n + b; },
        "affine:" + std::to_string(a) + ":" + std::to_string(b));
  }

  // Finite prefix; queries past the end are usage errors.
  static enumerated_set explicit_prefix(std::vector<std::uint64_t> values,
                                        std::string name = "explicit") {
    auto vals = std::make_shared<std::vector<std::uint64_t>>(std::move(values));
    return enumerated_set(
        [vals](std::uint64_t n) -> std::uint64_t {
          if (n >= vals->size())
            throw horizon_error(
                "enumerated_set: explicit prefix exhausted at index " +
                std::to_string(n));
          return (*vals)[n];
        },
        std::move(name));
  }

  // mu with a local strictness check against the previous index.
  std::uint64_t mu(std::uint64_t n) const {
    std::uint64_t v = fn_(n);
    if (n > 0) {
      std::uint64_t prev = fn_(n - 1);
      if (prev >= v)
        throw validation_error("enumerated_set '" + name_ +
                               "': enumeration not strictly increasing at index " +
                               std::to_string(n));
    }
    return v;
  }

  const std::string& name() const { return name_; }

  // Stateful forward walk with full monotonicity checking; everything that
  // enumerates a set goes through one of these.
  class cursor {
   public:
    explicit cursor(const enumerated_set& s) : fn_(s.fn_), name_(s.name_) {}
    std::uint64_t next() {
      std::uint64_t v = fn_(index_);
      if (prev_ && *prev_ >= v)
        throw validation_error("enumerated_set '" + name_ +
                               "': enumeration not strictly increasing at index " +
                               std::to_string(index_));
      prev_ = v;
      ++index_;
      return v;
    }
    std::uint64_t index() const { return index_; }

   private:
    std::function<std::uint64_t(std::uint64_t)> fn_;
    std::string name_;
    std::uint64_t index_ = 0;
    std::optional<std::uint64_t> prev_;
  };

  // Membership, decided by enumerating up to the value in question.
  bool contains(std::uint64_t v) const {
    cursor c(*this);
    for (;;) {
      std::uint64_t x = c.next();
      if (x == v) return true;
      if (x > v) return false;
    }
  }

  // |X intersect [lo, hi)|.
  std::uint64_t count_in(std::uint64_t lo, std::uint64_t hi) const {
    if (hi <= lo) return 0;
    cursor c(*this);
    std::uint64_t count = 0;
    for (;;) {
      std::uint64_t x = c.next();
      if (x >= hi) return count;
      if (x >= lo) ++count;
    }
  }

  // Values of X in [lo, hi), in order.
  std::vector<std::uint64_t> values_in(std::uint64_t lo, std::uint64_t hi) const {
    std::vector<std::uint64_t> out;
    if (hi <= lo) return out;
    cursor c(*this);
    for (;;) {
      std::uint64_t x = c.next();
      if (x >= hi) return out;
      if (x >= lo) out.push_back(x);
    }
  }

 private:
  enumerated_set(std::function<std::uint64_t(std::uint64_t)> fn, std::string name)
      : fn_(std::move(fn)), name_(std::move(name)) {}

  std::function<std::uint64_t(std::uint64_t)> fn_;
  std::string name_;
};

// f: N -> N. Progressiveness (f(n) > n) is demanded only where iteration
// needs it, and checked there.
class growth_function {
 public:
  static growth_function from_function(std::function<std::uint64_t(std::uint64_t)> f,
                                       std::string name = "f") {
    return growth_function(std::move(f), std::move(name));
  }
  static growth_function affine(std::uint64_t a, std::uint64_t b) {
    return growth_function([a, b](std::uint64_t n) { return a * n + b; },
                           "affine:" + std::to_string(a) + ":" +
                               std::to_string(b));
  }
  static growth_function explicit_prefix(std::vector<std::uint64_t> values,
                                         std::string name = "explicit") {
    auto vals = std::make_shared<std::vector<std::uint64_t>>(std::move(values));
    return growth_function(
        [vals](std::uint64_t n) -> std::uint64_t {
          if (n >= vals->size())
            throw horizon_error(
                "growth_function: explicit prefix exhausted at index " +
                std::to_string(n));
          return (*vals)[n];
        },
        std::move(name));
  }

  std::uint64_t operator()(std::uint64_t n) const { return fn_(n); }
  const std::string& name() const { return name_; }

 private:
  growth_function(std::function<std::uint64_t(std::uint64_t)> fn, std::string name)
      : fn_(std::move(fn)), name_(std::move(name)) {}
  std::function<std::uint64_t(std::uint64_t)> fn_;
  std::string name_;
};

struct interval {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;  // half-open [lo, hi)
  friend bool operator==(const interval&, const interval&) = default;
};

inline std::uint64_t pow2(std::uint64_t i) {
  if (i >= 63) throw error("pow2: exponent too large for this scale");
  return std::uint64_t(1) << i;
}

// The j-th sub-block of the i-th dyadic family of X:
// [mu(2^i + j), mu(2^i + j + 1)), for j < 2^i.
inline interval block(const enumerated_set& X, std::uint64_t i,
                      std::uint64_t j) {
  if (j >= pow2(i))
    throw error("block: sub-block index " + std::to_string(j) +
                " out of range for family " + std::to_string(i));
  std::uint64_t m = pow2(i) + j;
  return interval{X.mu(m), X.mu(m + 1)};
}

// Y meets the n-th window of X at least twice.
inline bool dominates_window(const enumerated_set& X, const enumerated_set& Y,
                             std::uint64_t n) {
  interval w{X.mu(n), X.mu(n + 1)};
  return Y.count_in(w.lo, w.hi) >= 2;
}

// Every sub-block of family i catches Y at least twice.
inline bool weakly_dominates_at(const enumerated_set& X,
                                const enumerated_set& Y, std::uint64_t i) {
  for (std::uint64_t j = 0; j < pow2(i); ++j) {
    interval b = block(X, i, j);
    if (Y.count_in(b.lo, b.hi) < 2) return false;
  }
  return true;
}

inline std::vector<std::uint64_t> find_good_indices(const enumerated_set& X,
                                                    const enumerated_set& Y,
                                                    std::uint64_t i_max) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i <= i_max; ++i)
    if (weakly_dominates_at(X, Y, i)) out.push_back(i);
  return out;
}

// The orbit f(n), f(f(n)), ... as an enumerated set. f must be progressive
// along the orbit; a non-progressive step is rejected when evaluated.
inline enumerated_set iterate_set(const growth_function& f, std::uint64_t n) {
  auto f_copy = f;
  return enumerated_set::from_function(
      [f_copy, n](std::uint64_t k) {
        std::uint64_t x = f_copy(n);
        if (x <= n)
          throw validation_error("iterate_set: f not progressive at " +
                                 std::to_string(n));
        for (std::uint64_t step = 0; step < k; ++step) {
          std::uint64_t y = f_copy(x);
          if (y <= x)
            throw validation_error("iterate_set: f not progressive at " +
                                   std::to_string(x));
          x = y;
        }
        return x;
      },
      "orbit:" + f.name() + "@" + std::to_string(n));
}

struct leq_star_verdict {
  bool holds = false;
  std::uint64_t threshold = 0;  // least m with f <= g on [m, N], when holds
  std::vector<std::uint64_t> counterexamples;  // all n <= N with f(n) > g(n)
};

// Eventual domination, decided on the window [0, N]. If f(N) > g(N) there
// is no threshold within the window and the verdict fails.
inline leq_star_verdict leq_star_upto(const growth_function& f,
                                      const growth_function& g,
                                      std::uint64_t N) {
  leq_star_verdict v;
  for (std::uint64_t n = 0; n <= N; ++n)
    if (f(n) > g(n)) v.counterexamples.push_back(n);
  if (!v.counterexamples.empty() && v.counterexamples.back() == N) {
    v.holds = false;
    return v;
  }
  v.holds = true;
  v.threshold = v.counterexamples.empty() ? 0 : v.counterexamples.back() + 1;
  return v;
}

}  // namespace treeforge::baire
