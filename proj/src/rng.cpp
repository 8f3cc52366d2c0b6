#include "stochfv/rng.hpp"

#include <cmath>
#include <numbers>

namespace stochfv {

namespace {
constexpr std::uint64_t kSeedStream = 0x5EED'5EED'0000'0001ull;
}

double standard_normal(std::uint64_t key, std::uint64_t stream, std::uint64_t index) {
    const auto w = Philox4x32(key).block(stream, index);
    const double u1 = to_unit_open_closed(w[0], w[1]);
    const double u2 = to_unit_open_closed(w[2], w[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double uniform01(std::uint64_t key, std::uint64_t stream, std::uint64_t index) {
    const auto w = Philox4x32(key).block(stream, index);
    return to_unit_open_closed(w[0], w[1]);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t realization) {
    const auto w = Philox4x32(master_seed).block(kSeedStream, realization);
    return (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
}

}  // namespace stochfv
