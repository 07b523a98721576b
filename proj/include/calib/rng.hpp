#pragma once
// Seeded RNG wrapper. Avoids std::uniform_*_distribution so that generated
// streams depend only on the seed, not on the standard library in use.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace calib {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t bounded(std::uint64_t n) {
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[bounded(i)]);
        }
    }

    // Index into a categorical distribution given cumulative weights
    // (ascending, last entry = total mass).
    std::size_t categorical(std::span<const double> cumulative) {
        const double u = next_unit() * cumulative.back();
        std::size_t lo = 0, hi = cumulative.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (u < cumulative[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        return lo;
    }

  private:
    std::mt19937_64 engine_;
};

// Derives a child seed from a base seed and a tag (FNV-1a over the tag,
// mixed with the base). Distinct tags give independent-looking streams.
inline std::uint64_t mix_seed(std::uint64_t base, std::string_view tag) {
    std::uint64_t h = 14695981039346656037ull ^ base;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ull;
    }
    // splitmix64 finalizer
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

}  // namespace calib
