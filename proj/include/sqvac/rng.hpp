#pragma once

// Seed derivation and the handful of samplers the detector models need.
//
// Stream contract: every block of kShotBlock consecutive shots draws from its
// own std::mt19937_64 seeded with
//   derive_seed(master, mode_index, stream, sub_index, block_index)
// where `stream` names the record kind and `sub_index` is the homodyne time
// bin (0 otherwise). Records are therefore identical regardless of the order
// or thread on which blocks are produced. The samplers below are written out
// rather than taken from <random> distributions, whose algorithms are
// implementation-defined, so records are bit-identical across standard
// libraries as well.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>
#include <algorithm>

namespace sqvac {

inline constexpr std::size_t kShotBlock = 4096;

enum class StreamKind : std::uint64_t { PhotonCount = 1, Homodyne = 2, PhaseSpace = 3 };

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t mode_index, StreamKind stream,
                                 std::uint64_t sub_index, std::uint64_t block_index) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ mode_index);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ sub_index);
    return splitmix64(h ^ block_index);
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on (0, 1) from the top 53 bits.
    double uniform() {
        const std::uint64_t bits = engine_() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Poisson by sequential inversion; large means are split into pieces of
    /// at most 30 so exp(-lambda) never underflows.
    std::uint64_t poisson(double lambda) {
        std::uint64_t total = 0;
        while (lambda > 30.0) {
            total += poisson_small(30.0);
            lambda -= 30.0;
        }
        return total + poisson_small(lambda);
    }

    std::uint64_t binomial(std::uint64_t trials, double p) {
        if (p >= 1.0) return trials;
        if (p <= 0.0) return 0;
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < trials; ++i) hits += uniform() < p ? 1 : 0;
        return hits;
    }

    /// Index of the first cumulative weight above a uniform draw; the last
    /// index absorbs any mass missing from `cdf`.
    std::size_t discrete(const std::vector<double>& cdf) {
        const double u = uniform();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        return it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
    }

private:
    std::uint64_t poisson_small(double lambda) {
        if (lambda <= 0.0) return 0;
        const double u = uniform();
        double p = std::exp(-lambda);
        double cdf = p;
        std::uint64_t k = 0;
        while (u > cdf && k < 1000) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace sqvac
