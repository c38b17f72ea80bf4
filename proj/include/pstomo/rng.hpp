#pragma once

// Seedable randomness with a fixed, documented mapping from engine output
// to samples, so that runs are bit-reproducible for a given master seed.
//
// Seed derivation: sub-seeds are obtained by folding a tag stream into the
// master seed with the splitmix64 finalizer,
//     acc <- splitmix64(acc ^ (tag + 0x9E3779B97F4A7C15)),
// starting from acc = master. Consumers document their tag streams.

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace pstomo {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t acc = master;
    for (std::uint64_t t : tags) {
        acc = splitmix64(acc ^ (t + 0x9E3779B97F4A7C15ULL));
    }
    return acc;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    // Uniform on [0, 1) with 53 significant bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; values are produced in pairs.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        auto [g0, g1] = normal_pair();
        spare_ = g1;
        have_spare_ = true;
        return g0;
    }

    // One complex standard normal (independent real and imaginary parts),
    // consuming exactly one Box-Muller pair.
    std::complex<double> complex_normal() {
        auto [g0, g1] = normal_pair();
        return {g0, g1};
    }

private:
    std::pair<double, double> normal_pair() {
        double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace pstomo
