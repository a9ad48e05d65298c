#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace mgw {

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Output number r (0-based) of a SplitMix64 stream started at master.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t r) {
    return splitmix64_mix(master + (r + 1) * 0x9E3779B97F4A7C15ULL);
}

// Philox2x64-10 keyed by a 64-bit seed, run over an incrementing counter.
// Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key = 0) : key_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        std::uint64_t x0 = counter_++, x1 = 0, k = key_;
        for (int round = 0; round < 10; ++round) {
            unsigned __int128 prod = static_cast<unsigned __int128>(0xD2B74407B1CE6E93ULL) * x0;
            std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
            std::uint64_t lo = static_cast<std::uint64_t>(prod);
            x0 = hi ^ k ^ x1;
            x1 = lo;
            k += 0x9E3779B97F4A7C15ULL;
        }
        spare_ = x1;
        have_spare_ = true;
        return x0;
    }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 prod = static_cast<unsigned __int128>((*this)()) * n;
        std::uint64_t lo = static_cast<std::uint64_t>(prod);
        if (lo < n) {
            std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                prod = static_cast<unsigned __int128>((*this)()) * n;
                lo = static_cast<std::uint64_t>(prod);
            }
        }
        return static_cast<std::uint64_t>(prod >> 64);
    }

    // P(k) = (1 - p) p^k, given log_p = log(p).
    std::uint64_t geometric(double log_p) { return static_cast<std::uint64_t>(std::floor(std::log(uniform()) / log_p)); }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::uint64_t spare_ = 0;
    bool have_spare_ = false;
};

}  // namespace mgw
