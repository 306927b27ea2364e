// rng.hpp -- deterministic random number streams for the simulation harness.
//
// xoshiro256** with seeding via splitmix64.  Per-replication streams are
// derived by hashing (master_seed, rep_index), so parallel schedules cannot
// change results and streams are bit-stable across platforms.  Normal
// variates are produced by inverse-CDF transform (no rejection sampling), so
// a stream consumes a fixed number of uniforms per draw.

#ifndef VSIV_RNG_HPP
#define VSIV_RNG_HPP

#include <cstdint>

#include <boost/math/special_functions/erf.hpp>

namespace vsiv {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // Stream for replication `rep` derived from `master`: seeds are mixed
    // through splitmix64 so nearby (master, rep) values give unrelated states.
    static Rng stream(std::uint64_t master, std::uint64_t rep) {
        std::uint64_t sm = master;
        std::uint64_t a = splitmix64(sm);
        sm ^= rep * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL;
        std::uint64_t b = splitmix64(sm);
        return Rng(a ^ (b + 0x165667b19e3779f9ULL));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on (0, 1): 53-bit mantissa, nudged away from exact 0.
    double uniform() {
        double u = (next_u64() >> 11) * 0x1.0p-53;
        return u == 0.0 ? 0x1.0p-53 : u;
    }

    // Standard normal via the inverse CDF: Phi^{-1}(u) = sqrt(2) erf^{-1}(2u-1).
    double normal() {
        double u = uniform();
        return 1.4142135623730951 * boost::math::erf_inv(2.0 * u - 1.0);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}  // namespace vsiv

#endif  // VSIV_RNG_HPP
