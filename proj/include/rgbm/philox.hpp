#pragma once

#include <array>
#include <cstdint>

namespace rgbm {

// Philox4x32-10 counter-based generator (Salmon et al. 2011).
// Stateless: output is a pure function of (counter, key), so any (agent, tick)
// noise value can be regenerated at will and in any order.
struct Philox4x32 {
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kW0;
            key[1] += kW1;
        }
        return ctr;
    }
};

// Deterministic N(0,1) noise addressed by (seed, domain, agent, tick).
// Each Philox block yields two independent normals via inverse-CDF transform;
// consecutive ticks for an agent share a block (tick>>1 selects it, tick&1
// picks the half), halving generator cost in sequential sweeps.
class NoiseStream {
  public:
    // domain separates independent uses of the same seed (0 = dynamics noise,
    // 1 = initial-condition draws).
    static double normal(std::uint64_t seed, std::uint32_t domain,
                         std::uint64_t agent, std::uint64_t tick);

    // Both normals of the block containing `tick` (tick must be even);
    // out[0] is tick, out[1] is tick+1.
    static void normal_pair(std::uint64_t seed, std::uint32_t domain,
                            std::uint64_t agent, std::uint64_t tick,
                            double out[2]);

    // Uniform strictly inside (0,1), built from the top 52 bits.
    static double uniform_from_bits(std::uint64_t bits);
};

}  // namespace rgbm
