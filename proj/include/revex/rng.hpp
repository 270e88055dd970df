#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace revex {

// mt19937_64 wrapper with explicit bounded draws. The engine itself is
// fully specified by the standard; std::uniform_int_distribution and
// std::shuffle are not, so results would differ across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // uniform in [0, n), n > 0
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    // uniform in [lo, hi], inclusive
    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
        return lo + bounded(hi - lo + 1);
    }

    // uniform in [0, 1)
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng.bounded(i)]);
    }
}

}  // namespace revex
