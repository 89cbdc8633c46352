#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cldrf {

// Stream-splitting mixer: derived seeds are splitmix64(base + index), so
// parallel and serial execution draw identical streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base + index);
}

/// Seedable portable generator: mt19937_64 (fully specified by the standard)
/// with explicit uniform/normal transforms instead of the
/// implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on (0,1), never exactly 0 or 1.
    double u01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * u01(); }

    // Box-Muller; the sine branch is discarded to keep the draw stateless.
    double normal(double mean = 0.0, double sd = 1.0) {
        const double u = u01();
        const double v = u01();
        const double z =
            std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
        return mean + sd * z;
    }

    // Integer in [0, bound) by rejection, unbiased.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace cldrf
