#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "specsense/errors.hpp"

namespace specsense {

/// Stable 64-bit FNV-1a hash of a byte string. Used to derive component
/// sub-seeds that do not depend on library or platform specifics.
inline std::uint64_t stable_hash64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

/// One round of the splitmix64 finalizer; scrambles a seed/index pair into a
/// well-mixed sub-seed so that nearby indices yield unrelated streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derive the sub-seed for component `kind` (e.g. "noise", "interferer",
/// "operator") at position `index` under a master seed. Adding or reordering
/// other components never perturbs the stream this returns.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view kind,
                                 std::uint64_t index) {
    return master_seed ^ splitmix64(stable_hash64(kind) + 0x9e3779b97f4a7c15ull * (index + 1));
}

/// Deterministic random source. All distribution logic is hand-rolled on top
/// of std::mt19937_64 raw output because std::uniform_int_distribution and
/// friends are implementation-defined and would break cross-platform and
/// cross-version reproducibility of seeded experiments.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound) by rejection sampling on the top bits.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw InvalidInputError("Rng::below: bound must be positive");
        if ((bound & (bound - 1)) == 0) return engine_() & (bound - 1);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (polar-free, deterministic two-call form).
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        // Guard the log: uniform01 can return exactly 0.
        while (u1 <= 0.0) u1 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Circularly symmetric complex normal with E|z|^2 = 1.
    std::complex<double> complex_gauss() {
        const double re = gauss();
        const double im = gauss();
        return {re / std::numbers::sqrt2, im / std::numbers::sqrt2};
    }

    /// Fisher-Yates shuffle producing a uniform random permutation of 0..n-1.
    std::vector<std::uint32_t> permutation(std::size_t n) {
        std::vector<std::uint32_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    /// Sorted m-subset of {0..n-1}, uniform over subsets (partial Fisher-Yates
    /// selection followed by a sort).
    std::vector<std::uint32_t> sample_sorted(std::size_t n, std::size_t m) {
        if (m > n) throw InvalidInputError("Rng::sample_sorted: m exceeds n");
        std::vector<std::uint32_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<std::uint32_t>(i);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<std::uint32_t> out(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace specsense
