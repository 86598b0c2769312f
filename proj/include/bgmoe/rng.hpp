#ifndef BGMOE_RNG_HPP
#define BGMOE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace bgmoe {

/// SplitMix64 (Steele/Lea/Flood; reference implementation by Vigna).
/// Counter-based construction: substream(seed, index) yields independent
/// streams so per-observation draws are order-independent and bit-identical
/// regardless of worker count or platform word order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Independent stream for (seed, index).
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        return Rng(mix(seed) + 0x9E3779B97F4A7C15ULL * mix(index + 0x632BE59BD9B4E019ULL));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on (0, 1); never returns the endpoints.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Marsaglia polar rejection.
    double normal() {
        for (;;) {
            const double v1 = 2.0 * uniform() - 1.0;
            const double v2 = 2.0 * uniform() - 1.0;
            const double s = v1 * v1 + v2 * v2;
            if (s > 0.0 && s < 1.0) {
                return v1 * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
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
            const double u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
                return d * v;
            }
        }
    }

    /// Gamma(shape, rate).
    double gamma(double shape, double rate) { return gamma(shape) / rate; }

private:
    std::uint64_t state_;
};

}  // namespace bgmoe

#endif
