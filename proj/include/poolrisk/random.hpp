#pragma once

// Counter-based uniforms: the draw for (seed, replication, component) is a pure
// function of that triple, so results do not depend on evaluation order or on
// how replications are split across threads.

#include <array>
#include <cstdint>

namespace poolrisk {

// Philox4x32-10 (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Counter round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct SeedSpec {
    std::uint64_t master_seed = 0;

    // Independent seed for a named purpose (e.g. the comonotonic versus the
    // independent portfolio of a ratio experiment).
    SeedSpec derive(std::uint64_t tag) const { return {splitmix64(master_seed ^ splitmix64(tag))}; }

    std::uint64_t bits(std::uint64_t replication, std::uint64_t component) const {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(replication),
                                      static_cast<std::uint32_t>(replication >> 32),
                                      static_cast<std::uint32_t>(component),
                                      static_cast<std::uint32_t>(component >> 32)};
        const Philox4x32::Key key{static_cast<std::uint32_t>(master_seed),
                                  static_cast<std::uint32_t>(master_seed >> 32)};
        const auto out = Philox4x32::apply(ctr, key);
        return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    }

    // Uniform on the open interval (0,1) with 53 bits of resolution.
    double uniform(std::uint64_t replication, std::uint64_t component) const {
        return (static_cast<double>(bits(replication, component) >> 11) + 0.5) * 0x1.0p-53;
    }

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

} // namespace poolrisk
