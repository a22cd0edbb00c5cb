#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace relic {

// Datapath word. Values are kept masked to the fabric data width (8/16/32).
using Word = uint32_t;

// Single RNG engine for every seeded algorithm in the toolchain.
using Rng = std::mt19937_64;

inline constexpr Word width_mask(int width)
{
    return width >= 32 ? 0xffffffffu : ((Word(1) << width) - 1u);
}

inline constexpr bool sign_bit(Word v, int width) { return (v >> (width - 1)) & 1u; }

// Sign-extend a width-bit word to int64.
inline constexpr int64_t to_signed(Word v, int width)
{
    int64_t x = v & width_mask(width);
    if (sign_bit(v, width))
        x -= int64_t(1) << width;
    return x;
}

inline constexpr int ceil_log2(int n)
{
    int bits = 0;
    while ((1 << bits) < n)
        ++bits;
    return bits;
}

// Errors map onto CLI exit codes: input 1, infeasible 2, unroutable 3, internal 4.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnroutableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define RELIC_CHECK(cond, msg)                                                                     \
    do {                                                                                           \
        if (!(cond))                                                                               \
            throw ::relic::InternalError(std::string("invariant violated: ") + (msg));             \
    } while (0)

inline uint64_t fnv1a64(std::string_view bytes)
{
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(uint64_t v);

} // namespace relic
