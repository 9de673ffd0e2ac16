#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace advact {

// Deterministic PRNG with explicitly implemented distributions.
//
// std::uniform_real_distribution and friends are implementation-defined, so
// reproducible experiments cannot rely on them. This generator (SplitMix64
// seeding + xoshiro256++) and the distributions below produce identical
// streams on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        // SplitMix64 expansion of the seed into the xoshiro state.
        std::uint64_t x = seed;
        for (auto& s : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller. One value per call; the cosine twin is
    // cached so consecutive calls consume a fixed amount of the stream.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Bounded rejection sampling; unbiased.
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Fisher-Yates shuffle with this stream.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Derives an independent child stream from (seed, tag, index). Used so that
// e.g. the epoch-7 shuffle stream is a pure function of the run seed and can
// never be perturbed by other consumers.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    std::uint64_t h = seed;
    h ^= tag + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= index + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return Rng(h);
}

namespace stream_tag {
constexpr std::uint64_t kInit = 1;      // parameter initialization
constexpr std::uint64_t kShuffle = 2;   // per-epoch minibatch order
constexpr std::uint64_t kDataset = 3;   // synthetic data generation
constexpr std::uint64_t kSplit = 4;     // train/test permutation
} // namespace stream_tag

} // namespace advact
