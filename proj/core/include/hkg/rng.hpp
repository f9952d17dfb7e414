#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace hkg {

// Seeded random stream with hand-rolled variate mappings. std::mt19937_64 is
// fully specified by the standard, but the std:: distributions are not, so
// every draw here goes through our own mapping to keep artifacts byte-identical
// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, bound). Rejection-free modulo is fine at our scales;
    // bound is tiny relative to 2^64 so the bias is negligible and, more
    // importantly, the mapping is fixed.
    std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller. No spare caching: two engine draws per
    // variate keeps the stream position a pure function of the call count.
    double gaussian() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Gumbel(0,1) = -log(-log(U)).
    double gumbel() {
        double u = uniform01();
        while (u <= 0.0) u = uniform01();
        return -std::log(-std::log(u));
    }

    // In-place Fisher-Yates, identical on every platform.
    template <typename T>
    void shuffle(T& seq) {
        if (seq.size() < 2) return;
        for (std::size_t i = seq.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(below(i + 1));
            std::swap(seq[i], seq[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Derives an independent stream seed for a named pipeline stage, so one user
// seed can drive several stages without correlated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace hkg
