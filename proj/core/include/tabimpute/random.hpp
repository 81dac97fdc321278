#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace tabimpute {

// Seeded generator with platform-independent draws. The standard
// distributions are implementation-defined, so values are derived from raw
// mt19937_64 output instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform in [lo, hi] on a log scale; requires 0 < lo <= hi.
    double log_uniform(double lo, double hi);

    /// Uniform integer in [0, n); n must be positive.
    std::size_t below(std::size_t n);

    /// Uniform integer in [lo, hi].
    int integer(int lo, int hi) {
        return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo) + 1));
    }

    /// Standard normal draw (Box-Muller).
    double normal();

    /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace tabimpute
