#pragma once

#include <array>
#include <cstdint>

namespace stochfv {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
/// pure function of (key, counter), so streams can be evaluated in any order.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t key)
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

    Counter operator()(Counter ctr) const {
        Key k = key_;
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, k);
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        return ctr;
    }

    /// Four words for a 128-bit counter given as two 64-bit halves.
    Counter block(std::uint64_t hi, std::uint64_t lo) const {
        return (*this)({static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo >> 32),
                        static_cast<std::uint32_t>(hi), static_cast<std::uint32_t>(hi >> 32)});
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Counter single_round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
        return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    }

    Key key_;
};

/// Uniform double in (0, 1] from 53 random bits.
inline double to_unit_open_closed(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

/// Standard normal for stream position `index` of `key` (Box-Muller on one Philox block).
double standard_normal(std::uint64_t key, std::uint64_t stream, std::uint64_t index);

/// Uniform double in (0, 1] for stream position `index` of `key`.
double uniform01(std::uint64_t key, std::uint64_t stream, std::uint64_t index);

/// Seed of realization `realization` in an ensemble keyed by `master_seed`.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t realization);

}  // namespace stochfv
