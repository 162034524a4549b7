#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace tempo {

// A difference bound (c, <) or (c, <=) packed into one integer:
// 2c for strict, 2c+1 for weak. The packing makes comparison plain integer
// order ((c,<) < (c,<=) < (c+1,<)) and addition branch-free.
using bound_t = int32_t;

inline constexpr bound_t kBoundInf = std::numeric_limits<int32_t>::max();
inline constexpr bound_t kLeZero = 1;  // (0, <=)
inline constexpr bound_t kLtZero = 0;  // (0, <)

constexpr bound_t make_bound(int constant, bool weak) {
    return static_cast<bound_t>(2 * constant + (weak ? 1 : 0));
}

constexpr bool bound_is_weak(bound_t b) { return (b & 1) != 0; }
constexpr bool bound_is_strict(bound_t b) { return (b & 1) == 0; }
constexpr int bound_constant(bound_t b) { return b >> 1; }

// (c1,s1) + (c2,s2) = (c1+c2, weak iff both weak); Infinity absorbs.
constexpr bound_t bound_add(bound_t a, bound_t b) {
    if (a == kBoundInf || b == kBoundInf) return kBoundInf;
    return a + b - ((a | b) & 1);
}

// Negation of the constraint x-y ~ c is y-x ~' -c with strictness flipped.
constexpr bound_t bound_negate(bound_t b) { return 1 - b; }

// Weakened version: (c,<) -> (c,<=).
constexpr bound_t bound_weaken(bound_t b) {
    return b == kBoundInf ? kBoundInf : (b | 1);
}

// Strict version: (c,<=) -> (c,<).
constexpr bound_t bound_strictify(bound_t b) {
    return b == kBoundInf ? kBoundInf : (b & ~1);
}

inline std::string bound_to_string(bound_t b) {
    if (b == kBoundInf) return "inf";
    return (bound_is_weak(b) ? "<=" : "<") + std::to_string(bound_constant(b));
}

}  // namespace tempo
