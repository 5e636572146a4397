#pragma once

// Counter-based random streams (Philox4x32-10). A draw is addressed by
// (seed, stream, step, slot, block), so replica- or thread-parallel
// execution cannot change the sampled numbers.

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>

namespace kmv {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
    constexpr std::uint64_t M0 = 0xD2511F53ull;
    constexpr std::uint64_t M1 = 0xCD9E8D57ull;
    std::uint64_t p0 = M0 * c[0];
    std::uint64_t p1 = M1 * c[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

inline std::array<std::uint32_t, 4> philox_block(std::uint64_t key, std::uint64_t ctr_hi,
                                                 std::uint64_t ctr_lo) {
    std::array<std::uint32_t, 4> c = {
        static_cast<std::uint32_t>(ctr_lo), static_cast<std::uint32_t>(ctr_lo >> 32),
        static_cast<std::uint32_t>(ctr_hi), static_cast<std::uint32_t>(ctr_hi >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k0, k1);
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return c;
}

inline double u64_to_unit(std::uint64_t x) {
    // 53-bit mantissa, result in [0,1)
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

} // namespace detail

// One logical stream; `stream` encodes (kind tag, index).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    static std::uint64_t stream_id(std::uint32_t kind, std::uint64_t index) {
        return (static_cast<std::uint64_t>(kind) << 48) | (index & 0xFFFFFFFFFFFFull);
    }

    // Two uniforms in [0,1) from one counter block. step < 2^56, slot < 16, block < 16.
    std::array<double, 2> uniform2(std::uint64_t step, std::uint32_t slot, std::uint32_t block) const {
        assert(step < (1ull << 56) && slot < 16 && block < 16);
        std::uint64_t lo = (step << 8) | (static_cast<std::uint64_t>(slot) << 4) | block;
        auto b = detail::philox_block(seed_, stream_, lo);
        std::uint64_t w0 = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
        std::uint64_t w1 = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
        return {detail::u64_to_unit(w0), detail::u64_to_unit(w1)};
    }

    // Standard Gaussian pair (Box-Muller).
    std::array<double, 2> gauss2(std::uint64_t step, std::uint32_t slot, std::uint32_t block) const {
        auto u = uniform2(step, slot, block);
        double r = std::sqrt(-2.0 * std::log1p(-u[0])); // 1-u in (0,1], log finite
        double th = 6.283185307179586476925286766559 * u[1];
        return {r * std::cos(th), r * std::sin(th)};
    }

    // Fills out[0..n) with standard Gaussians.
    void fill_gauss(std::uint64_t step, std::uint32_t slot, double* out, std::size_t n) const {
        for (std::size_t i = 0; i < n; i += 2) {
            auto g = gauss2(step, slot, static_cast<std::uint32_t>(i / 2));
            out[i] = g[0];
            if (i + 1 < n) out[i + 1] = g[1];
        }
    }

    double uniform01(std::uint64_t step, std::uint32_t slot, std::uint32_t block) const {
        return uniform2(step, slot, block)[0];
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace kmv
