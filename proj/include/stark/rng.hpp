#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stark::rng {

// 64-bit FNV-1a, also used for file checksums and config hashes.
inline constexpr std::uint64_t fnv1a(std::string_view bytes,
                                     std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline constexpr std::uint64_t fnv1a_u64(std::uint64_t x, std::uint64_t h) {
    for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace detail {
inline std::uint64_t mix(std::uint64_t h) { return h; }
template <class... Rest>
std::uint64_t mix(std::uint64_t h, std::uint64_t head, Rest... rest) {
    return mix(fnv1a_u64(head, h), static_cast<std::uint64_t>(rest)...);
}
}  // namespace detail

// Derives an independent sub-stream seed from a root seed, a stream label and
// any number of integer indices (task, grid point, sample, ...).  All
// randomness in the toolkit flows through this so that results do not depend
// on scheduling or on which subset of tasks runs.
template <class... Ints>
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, Ints... idx) {
    std::uint64_t h = fnv1a(label, fnv1a_u64(root, 0xcbf29ce484222325ull));
    return detail::mix(h, static_cast<std::uint64_t>(idx)...);
}

template <class... Ints>
std::mt19937_64 engine(std::uint64_t root, std::string_view label, Ints... idx) {
    return std::mt19937_64(derive_seed(root, label, idx...));
}

// Rademacher +-1 draw; bit-portable across standard library implementations.
inline double rademacher(std::mt19937_64& eng) {
    return (eng() & 1ull) ? 1.0 : -1.0;
}

}  // namespace stark::rng
