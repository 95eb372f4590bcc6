#ifndef RENOIR_RNG_HPP
#define RENOIR_RNG_HPP

#include <cstdint>

namespace renoir::rng {

// splitmix64 output function. Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derives a child key from (key, word). Distinct words give distinct keys.
inline std::uint64_t derive(std::uint64_t key, std::uint64_t word) {
    return mix64(key ^ (0x9E3779B97F4A7C15ull + mix64(word)));
}

// Fixed stream ids so independent uses of one master seed never collide.
enum StreamId : std::uint64_t {
    kSample = 1,
    kEval = 2,
    kAttackInit = 3,
    kAttackEot = 4,
    kAttackJudge = 5,
    kTrainNoise = 6,
    kTrainShuffle = 7,
    kWeightInit = 8,
    kBruteForce = 9,
    kMc = 10,
};

// Counter-based generator: value i of a stream is a pure function of
// (key, i), so any draw can be produced without generating its
// predecessors and parallel/serial sampling agree bit for bit.
class Stream {
public:
    explicit Stream(std::uint64_t key) : key_(key) {}
    Stream(std::uint64_t key, std::uint64_t word) : key_(derive(key, word)) {}

    std::uint64_t next_u64() { return mix64(key_ + counter_++ * 0x9E3779B97F4A7C15ull); }

    // Uniform on [0,1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on the open interval (0,1); safe to pass through log().
    double next_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    // Standard normal via Box-Muller (no rejection, fixed consumption).
    double next_gauss();

    // Standard Laplace (scale 1) via inverse CDF.
    double next_laplace();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace renoir::rng

#endif
