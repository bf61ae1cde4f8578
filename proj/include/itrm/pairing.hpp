#pragma once

#include <cstdint>
#include <utility>

namespace itrm {

// Cantor pairing p(a,b) = (a+b)(a+b+1)/2 + b, the canonical bijection
// between pairs of naturals and naturals.
inline uint64_t cantor_pair(uint64_t a, uint64_t b) {
    uint64_t s = a + b;
    return s * (s + 1) / 2 + b;
}

inline std::pair<uint64_t, uint64_t> cantor_unpair(uint64_t n) {
    // Largest s with s(s+1)/2 <= n, found without floating point.
    uint64_t s = 0;
    uint64_t tri = 0;
    while (tri + s + 1 <= n) {
        ++s;
        tri += s;
    }
    uint64_t b = n - tri;
    return {s - b, b};
}

}  // namespace itrm
