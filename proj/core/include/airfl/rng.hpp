#ifndef AIRFL_RNG_HPP
#define AIRFL_RNG_HPP

#include <complex>
#include <cmath>
#include <cstdint>

namespace airfl {

// Stable 64-bit mixer (SplitMix64 finalizer). Used both to seed streams and
// to derive substream keys from (seed, tag, indices) tuples.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Purpose tags keep substreams for different draw kinds disjoint, so e.g.
// growing the model dimension never perturbs the channel realizations.
enum class StreamTag : std::uint64_t {
    Channel = 0x6368616e6e656cULL,  // per (round, device)
    Noise = 0x6e6f697365ULL,        // per (round, antenna row)
    Signal = 0x7369676e616cULL,     // surrogate transmit signals
    Data = 0x64617461ULL,           // synthetic dataset generation
    Batch = 0x6261746368ULL,        // mini-batch shuffling
    Init = 0x696e6974ULL,           // model parameter init
    Misc = 0x6d697363ULL,
};

// xoshiro256++ with SplitMix64 seeding. Small state, cheap construction, and
// a sequence that is identical on every platform (the standard library
// distributions are not pinned by the standard, so we do not use them).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s = mix64(s);
            word = s;
        }
        has_cached_normal_ = false;
        cached_normal_ = 0.0;
    }

    std::uint64_t next_u64() noexcept {
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

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard real normal via Box-Muller (pair cached).
    double normal() noexcept {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        const double r = std::sqrt(-2.0 * std::log(1.0 - uniform()));
        const double theta = 2.0 * kPi * uniform();
        cached_normal_ = r * std::sin(theta);
        has_cached_normal_ = true;
        return r * std::cos(theta);
    }

    // Circularly-symmetric complex normal with E|z|^2 = 1. Magnitude and
    // phase drawn directly: |z|^2 ~ Exp(1), arg(z) ~ U[0, 2pi).
    std::complex<double> cnormal() noexcept {
        const double r = std::sqrt(-std::log(1.0 - uniform()));
        const double theta = 2.0 * kPi * uniform();
        return {r * std::cos(theta), r * std::sin(theta)};
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    bool has_cached_normal_;
    double cached_normal_;
};

// Substream key derivation: absorb words one at a time through the mixer.
constexpr std::uint64_t derive_key(std::uint64_t seed, StreamTag tag,
                                   std::uint64_t a = 0, std::uint64_t b = 0,
                                   std::uint64_t c = 0) noexcept {
    std::uint64_t h = mix64(seed ^ static_cast<std::uint64_t>(tag));
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

inline RngStream substream(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0,
                           std::uint64_t b = 0, std::uint64_t c = 0) noexcept {
    return RngStream(derive_key(seed, tag, a, b, c));
}

}  // namespace airfl

#endif  // AIRFL_RNG_HPP
