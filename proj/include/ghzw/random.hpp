// Seeded RNG with portable uniform/Poisson sampling.
// All randomness in the library flows through Rng so that runs are
// reproducible from a single master seed; substreams are derived with
// splitmix64 so parallel consumers stay order-independent.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace ghzw {

// splitmix64 finalizer; also the substream derivation hash.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent substream seed for (master, index) pairs.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 1));
}

// Nondeterministic seed for invocations that did not pass one.
inline std::uint64_t entropy_seed() {
    std::random_device rd;
    std::uint64_t hi = rd();
    std::uint64_t lo = rd();
    return splitmix64((hi << 32) ^ lo);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1), 53-bit resolution, engine-output only (no
    // implementation-defined std::distribution involved).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Poisson sample. Inversion by sequential search below the cutoff,
    // Hormann's PTRS transformed rejection above it; both depend only on
    // uniform() so results are identical across platforms.
    long long poisson(double mean) {
        if (mean < 0.0 || !std::isfinite(mean))
            throw std::invalid_argument("poisson: mean must be finite and >= 0");
        if (mean == 0.0) return 0;
        if (mean < 30.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

private:
    long long poisson_inversion(double mean) {
        const double limit = std::exp(-mean);
        double prod = uniform();
        long long k = 0;
        while (prod > limit) {
            prod *= uniform();
            ++k;
        }
        return k;
    }

    long long poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::abs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
            const double rhs = kf * loglam - mean - std::lgamma(kf + 1.0);
            if (lhs <= rhs) return static_cast<long long>(kf);
        }
    }

    std::mt19937_64 eng_;
};

}  // namespace ghzw
