#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gbest/error.hpp"

namespace gbest {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// FNV-1a hash, used to derive rng stream indices from human-readable labels
// (e.g. "data|N=50|cens=0.7|rep=3"). Distinct labels give distinct streams.
inline std::uint64_t stream_label(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic random stream identified by (master_seed, stream_index).
// The pair fully determines the output sequence; distinct stream indices
// give statistically independent sequences (xoshiro256++ state filled by
// splitmix64 from a mix of seed and index). Every Monte Carlo operation in
// the library takes an explicit stream, so results never depend on
// execution order or thread count.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : master_seed_(master_seed), stream_index_(stream_index) {
        std::uint64_t mix = master_seed ^ (stream_index * 0x9e3779b97f4a7c15ULL + 0x3c6ef372fe94f82aULL);
        for (auto& word : state_) word = detail::splitmix64(mix);
    }

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    // Derive an independent child stream; mixing keeps distinct (index, child)
    // pairs on distinct streams.
    RngStream substream(std::uint64_t child) const {
        std::uint64_t mix = stream_index_ ^ (child * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
        return RngStream(master_seed_, detail::splitmix64(mix));
    }

    std::uint64_t next_u64() {
        std::uint64_t* s = state_;
        const std::uint64_t result = detail::rotl64(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = detail::rotl64(s[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() { return 1.0 - uniform(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) (Lemire's multiply-reject method).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw Error("uniform_int: n must be positive");
        std::uint64_t x = next_u64();
        unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<unsigned __int128>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    double normal() {
        // Box-Muller; one variate per call keeps the stream stateless.
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential() { return -std::log(uniform_pos()); }

    // Gamma(shape, 1) by Marsaglia-Tsang; shape == 0 returns 0.
    double gamma(double shape) {
        if (shape < 0.0) throw Error("gamma: shape must be nonnegative");
        if (shape == 0.0) return 0.0;
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform_pos(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Beta(a, b) with the degenerate endpoints handled explicitly:
    // b == 0 gives 1, a == 0 gives 0.
    double beta(double a, double b) {
        if (b <= 0.0) return 1.0;
        if (a <= 0.0) return 0.0;
        const double x = gamma(a);
        const double y = gamma(b);
        const double s = x + y;
        if (s <= 0.0) return a / (a + b);
        return x / s;
    }

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::uint64_t state_[4];
};

}  // namespace gbest
