#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <vector>

namespace wavepinn {

/// Seeded generator with explicit distribution algorithms so that streams are
/// reproducible bit-for-bit across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    /// Uniform draw strictly inside (0, 1).
    double uniform01() {
        const uint64_t x = eng_();
        return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    /// Unbiased integer in [0, n).
    uint64_t below(uint64_t n) {
        const uint64_t threshold = (-n) % n;
        uint64_t x;
        do {
            x = eng_();
        } while (x < threshold);
        return x % n;
    }

    /// Fisher-Yates shuffle using below(); independent of std::shuffle internals.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    friend std::ostream& operator<<(std::ostream& os, const Rng& r) { return os << r.eng_; }
    friend std::istream& operator>>(std::istream& is, Rng& r) { return is >> r.eng_; }

private:
    std::mt19937_64 eng_;
};

} // namespace wavepinn
