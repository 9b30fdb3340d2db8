#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace treeforge {

// Every failure in this library is reported through one of these. Operations
// that have a meaningful "no" answer return verdict structs instead; throwing
// is reserved for violated preconditions, malformed inputs and exhausted
// scan horizons.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input fails a structural invariant (not prefix-closed, not monotone, ...).
struct validation_error : error {
  using error::error;
};

// A scan hit its depth, value or node budget before reaching a decision.
struct horizon_error : error {
  using error::error;
};

enum class width_t : std::uint8_t { binary, omega };

inline const char* width_name(width_t w) {
  return w == width_t::binary ? "2" : "omega";
}

// "t ramifies below k" comes in two readings that differ by one level.
// strict_below asks for a splitting node of length < k-1, inclusive for
// length < k. Downstream consumers default to inclusive.
enum class ramify_mode : std::uint8_t { strict_below, inclusive };

// The n-th order on trees: membership only keeps rank-<=n ramification
// points as nodes of the stronger tree; preserve_split additionally makes
// them ramify there. Fusion arguments need preserve_split.
enum class leqn_mode : std::uint8_t { membership, preserve_split };

}  // namespace treeforge
