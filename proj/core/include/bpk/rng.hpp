#pragma once

#include <array>
#include <cstdint>

namespace bpk {

/// Deterministic random source backed by xoshiro256++, seeded through
/// splitmix64. One instance is single-consumer; derived streams are
/// independent and may run concurrently.
class SeededGenerator {
  public:
    explicit SeededGenerator(std::uint64_t seed);

    /// Raw 64-bit draw.
    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 bits of precision.
    double next_uniform();

    /// Standard normal deviate (Box-Muller, pair cached).
    double next_gaussian();

    /// Independent child stream for record/index `index`. The child seed is
    /// splitmix64(seed + GOLDEN_GAMMA * (index + 1)), so streams derived from
    /// the same parent never collide for distinct indices.
    SeededGenerator derive_stream(std::uint64_t index) const;

    /// Seed the child stream at `index` would be constructed with.
    std::uint64_t derived_seed(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace bpk
