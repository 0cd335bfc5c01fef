#pragma once

#include <cmath>
#include <cstdint>

namespace ndsim {

// Counter-based random stream. Output j of stream s under seed x is a fixed
// bit-mix of (x, s, j), so identical (seed, stream_id) reproduce the same
// sequence on any platform and distinct stream_ids give independent streams
// without jump-ahead bookkeeping.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_(mix(mix(seed + 0x9e3779b97f4a7c15ull) ^ stream_id)),
          key2_(mix(key_ ^ 0x94d049bb133111ebull)) {}

    std::uint64_t seed_key() const { return key_; }

    std::uint64_t next_u64() {
        std::uint64_t c = counter_++ * 0x9e3779b97f4a7c15ull;
        return mix(mix(c + key_) ^ key2_);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound). Lemire multiply-shift; bias is O(bound/2^64).
    std::uint64_t uniform_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t key2_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ndsim
