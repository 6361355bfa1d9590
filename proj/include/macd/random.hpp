#ifndef MACD_RANDOM_HPP
#define MACD_RANDOM_HPP

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace macd {

// All randomness in this project flows through this header. std::mt19937_64 is
// fully specified by the standard; the distributions are hand-rolled because the
// standard library ones are implementation-defined and would break bit-for-bit
// reproducibility across toolchains.

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministically derive an independent stream seed from a base seed and a tag.
inline uint64_t derive_seed(uint64_t base, uint64_t tag) {
    return mix64(base ^ mix64(tag));
}

inline uint64_t derive_seed(uint64_t base, uint64_t tag1, uint64_t tag2) {
    return derive_seed(derive_seed(base, tag1), tag2);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    /// Unbiased integer in [0, n). Lemire's multiply-shift with rejection.
    uint64_t bounded(uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(gen_()) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            const uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(gen_()) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    size_t index(size_t n) { return static_cast<size_t>(bounded(n)); }

    /// Inclusive range [lo, hi].
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(bounded(static_cast<uint64_t>(hi - lo + 1)));
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Fisher-Yates; deterministic, unlike std::shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace macd

#endif
