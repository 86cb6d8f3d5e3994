#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace vrpkit {

// Deterministic RNG with pinned draw algorithms. std::mt19937_64 output is
// standardized, but the std distributions are not; drawing through these
// helpers keeps seeded runs reproducible across compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi], inclusive. Rejection sampling, no modulo bias.
    std::uint64_t next_int(std::uint64_t lo, std::uint64_t hi) {
        const std::uint64_t span = hi - lo + 1;
        if (span == 0) return engine_(); // full range
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return lo + v % span;
    }

    int next_index(int size) {
        return static_cast<int>(next_int(0, static_cast<std::uint64_t>(size) - 1));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            const int j = next_index(i + 1);
            std::swap(v[i], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[next_index(static_cast<int>(v.size()))];
    }

private:
    std::mt19937_64 engine_;
};

} // namespace vrpkit
