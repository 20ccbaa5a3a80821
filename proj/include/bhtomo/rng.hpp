#pragma once

#include <cstdint>

namespace bhtomo {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// SplitMix64: counter-based generator, identical sequence on every platform.
// All sampling in the library goes through an explicitly passed instance;
// there is no hidden global RNG state.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return mix64(state_ += 0x9e3779b97f4a7c15ull); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(static_cast<unsigned __int128>(next_u64()) * n >> 64);
    }

    // Independent child stream; used to give each work item (training example,
    // window, trial, ...) its own deterministic generator.
    static std::uint64_t derive_stream(std::uint64_t master, std::uint64_t stream) {
        return mix64(master + 0x9e3779b97f4a7c15ull * (stream + 1));
    }

private:
    std::uint64_t state_;
};

}  // namespace bhtomo
