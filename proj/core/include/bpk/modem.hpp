#pragma once

#include <cstdint>
#include <vector>

#include "bpk/rng.hpp"

namespace bpk {

/// Bifurcation parameter keying setup. Defaults: r = 3.7 keys "space" (0),
/// r = 3.75 keys "mark" (1), 4096 samples per bit at 11025 Hz.
struct ModulationConfig {
    double r_space = 3.7;
    double r_mark = 3.75;
    std::size_t samples_per_bit = 4096;
    double sample_rate = 11025.0;

    double bit_duration_s() const {
        return static_cast<double>(samples_per_bit) / sample_rate;
    }
    double bandwidth_hz() const { return sample_rate / 2.0; }

    /// Throws std::invalid_argument on out-of-range fields. Both r values
    /// must sit in the chaotic band (3.57, 4] and differ.
    void validate() const;

    bool operator==(const ModulationConfig&) const = default;
};

/// Bit sequence over {0 = space, 1 = mark}.
using BitStream = std::vector<std::uint8_t>;

struct BasebandSignal {
    std::vector<double> samples;
    double sample_rate = 0.0;
};

/// Derived air-interface numbers for a config.
struct LinkParameters {
    double bit_duration_s;
    double bit_rate_bps;
    double bandwidth_hz;
    /// 100 * (r_mark - r_space) / midpoint; 1.342% for the defaults.
    double deviation_percent;
};

/// Keys each bit to its bifurcation parameter and iterates the logistic map
/// samples_per_bit times per bit, carrying the chaotic state across bit
/// boundaries. A transient burn-in at r_space from x0 precedes the first bit.
BasebandSignal modulate(const BitStream& bits, const ModulationConfig& cfg,
                        double x0);

/// Ablation variant: every bit restarts from a fresh uniform x0 in
/// (0.01, 0.99) drawn from `g`, with its own burn-in at the bit's r.
BasebandSignal modulate_reseed(const BitStream& bits,
                               const ModulationConfig& cfg,
                               SeededGenerator& g);

LinkParameters link_parameters(const ModulationConfig& cfg);

} // namespace bpk
