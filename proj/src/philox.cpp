#include "rgbm/philox.hpp"

#include "rgbm/numeric.hpp"

namespace rgbm {

double NoiseStream::uniform_from_bits(std::uint64_t bits) {
    // (k + 1/2) / 2^52 over the top 52 bits: every value exact, endpoints
    // excluded, so the inverse CDF below never sees 0 or 1.
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

void NoiseStream::normal_pair(std::uint64_t seed, std::uint32_t domain,
                              std::uint64_t agent, std::uint64_t tick,
                              double out[2]) {
    // Counter layout {agent, tick/2, domain, 0}: room for 2^32 agents and
    // 2^33 ticks per domain, orders of magnitude beyond any run here.
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(agent),
        static_cast<std::uint32_t>(tick >> 1), domain, 0u};
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const auto r = Philox4x32::block(ctr, key);
    const std::uint64_t u0 = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t u1 = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    out[0] = norm_ppf(uniform_from_bits(u0));
    out[1] = norm_ppf(uniform_from_bits(u1));
}

double NoiseStream::normal(std::uint64_t seed, std::uint32_t domain,
                           std::uint64_t agent, std::uint64_t tick) {
    double pair[2];
    normal_pair(seed, domain, agent, tick & ~std::uint64_t{1}, pair);
    return pair[tick & 1];
}

}  // namespace rgbm
