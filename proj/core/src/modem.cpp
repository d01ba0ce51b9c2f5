#include "bpk/modem.hpp"

#include <stdexcept>
#include <string>

#include "bpk/chaos.hpp"

namespace bpk {

void ModulationConfig::validate() const {
    auto chaotic = [](double r) { return r > 3.57 && r <= 4.0; };
    if (!chaotic(r_space) || !chaotic(r_mark)) {
        throw std::invalid_argument(
            "ModulationConfig: r_space and r_mark must lie in (3.57, 4]");
    }
    if (r_space == r_mark) {
        throw std::invalid_argument("ModulationConfig: r_space == r_mark");
    }
    if (samples_per_bit < 1) {
        throw std::invalid_argument("ModulationConfig: samples_per_bit must be >= 1");
    }
    if (!(sample_rate > 0.0)) {
        throw std::invalid_argument("ModulationConfig: sample_rate must be positive");
    }
}

namespace {

double bit_r(std::uint8_t bit, const ModulationConfig& cfg) {
    if (bit == 0) return cfg.r_space;
    if (bit == 1) return cfg.r_mark;
    throw std::invalid_argument("modulate: invalid bit symbol " +
                                std::to_string(static_cast<int>(bit)));
}

} // namespace

BasebandSignal modulate(const BitStream& bits, const ModulationConfig& cfg,
                        double x0) {
    cfg.validate();
    if (!(x0 > 0.0 && x0 < 1.0)) {
        throw std::invalid_argument("modulate: x0 must lie in (0, 1)");
    }
    BasebandSignal out;
    out.sample_rate = cfg.sample_rate;
    if (bits.empty()) {
        return out;
    }
    out.samples.reserve(bits.size() * cfg.samples_per_bit);
    double x = x0;
    for (std::size_t i = 0; i < kDefaultTransient; ++i) {
        x = cfg.r_space * x * (1.0 - x);
    }
    for (std::uint8_t bit : bits) {
        const double r = bit_r(bit, cfg);
        for (std::size_t i = 0; i < cfg.samples_per_bit; ++i) {
            x = r * x * (1.0 - x);
            out.samples.push_back(x);
        }
    }
    return out;
}

BasebandSignal modulate_reseed(const BitStream& bits,
                               const ModulationConfig& cfg,
                               SeededGenerator& g) {
    cfg.validate();
    BasebandSignal out;
    out.sample_rate = cfg.sample_rate;
    out.samples.reserve(bits.size() * cfg.samples_per_bit);
    for (std::uint8_t bit : bits) {
        const double r = bit_r(bit, cfg);
        double x = 0.01 + 0.98 * g.next_uniform();
        for (std::size_t i = 0; i < kDefaultTransient; ++i) {
            x = r * x * (1.0 - x);
        }
        for (std::size_t i = 0; i < cfg.samples_per_bit; ++i) {
            x = r * x * (1.0 - x);
            out.samples.push_back(x);
        }
    }
    return out;
}

LinkParameters link_parameters(const ModulationConfig& cfg) {
    cfg.validate();
    LinkParameters p{};
    p.bit_duration_s = cfg.bit_duration_s();
    p.bit_rate_bps = 1.0 / p.bit_duration_s;
    p.bandwidth_hz = cfg.bandwidth_hz();
    const double midpoint = (cfg.r_mark + cfg.r_space) / 2.0;
    p.deviation_percent = 100.0 * (cfg.r_mark - cfg.r_space) / midpoint;
    return p;
}

} // namespace bpk
