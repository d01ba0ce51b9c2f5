#include "bpk/rng.hpp"

#include <cmath>
#include <numbers>

namespace bpk {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

SeededGenerator::SeededGenerator(std::uint64_t seed) : seed_(seed) {
    // Expand the seed into four state words with a splitmix64 sequence,
    // the initialization recommended by the xoshiro authors.
    std::uint64_t s = seed;
    for (auto& word : state_) {
        s += kGoldenGamma;
        word = mix64(s);
    }
}

std::uint64_t SeededGenerator::next_u64() {
    // xoshiro256++ (Blackman & Vigna 2019)
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

double SeededGenerator::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededGenerator::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 shifted into (0,1] so log() stays finite.
    const double u1 = 1.0 - next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t SeededGenerator::derived_seed(std::uint64_t index) const {
    return mix64(seed_ + kGoldenGamma * (index + 1));
}

SeededGenerator SeededGenerator::derive_stream(std::uint64_t index) const {
    return SeededGenerator(derived_seed(index));
}

} // namespace bpk
