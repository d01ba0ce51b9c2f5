#include "bpk/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bpk/chaos.hpp"

namespace bpk {

double signal_power(const BasebandSignal& s, PowerConvention convention) {
    const auto& x = s.samples;
    if (x.size() < 2) {
        throw std::domain_error("signal_power: need at least 2 samples");
    }
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double v : x) {
        sum += v;
        sum_sq += v * v;
    }
    if (convention == PowerConvention::mean_square) {
        return sum_sq / n;
    }
    const double mean = sum / n;
    return std::max(0.0, sum_sq / n - mean * mean);
}

BasebandSignal awgn(const BasebandSignal& s, double snr_db, SeededGenerator& g,
                    PowerConvention convention) {
    const double p_signal = signal_power(s, convention);
    if (!(p_signal > 0.0)) {
        throw std::domain_error("awgn: zero-power signal, SNR undefined");
    }
    const double p_noise = p_signal / std::pow(10.0, snr_db / 10.0);
    return add_noise(s, std::sqrt(p_noise), g);
}

BasebandSignal add_noise(const BasebandSignal& s, double sigma,
                         SeededGenerator& g) {
    BasebandSignal out;
    out.sample_rate = s.sample_rate;
    out.samples.resize(s.samples.size());
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        out.samples[i] = s.samples[i] + sigma * g.next_gaussian();
    }
    return out;
}

double nominal_carrier_power(const ModulationConfig& cfg,
                             PowerConvention convention) {
    cfg.validate();
    // long reference orbits from a fixed generic starting point
    constexpr std::size_t kReferenceSamples = 1u << 17;
    double acc = 0.0;
    for (double r : {cfg.r_space, cfg.r_mark}) {
        BasebandSignal ref;
        ref.sample_rate = cfg.sample_rate;
        ref.samples = generate({r, 0.3}, kReferenceSamples);
        acc += signal_power(ref, convention);
    }
    return acc / 2.0;
}

double spreading_factor_db(const ModulationConfig& cfg) {
    cfg.validate();
    // B * Tb = (fs/2) * (samples_per_bit / fs) = samples_per_bit / 2
    return 10.0 * std::log10(static_cast<double>(cfg.samples_per_bit) / 2.0);
}

double ebn0_to_snr(double ebn0_db, const ModulationConfig& cfg) {
    return ebn0_db - spreading_factor_db(cfg);
}

double snr_to_ebn0(double snr_db, const ModulationConfig& cfg) {
    return snr_db + spreading_factor_db(cfg);
}

LinkBudget link_budget_from_ebn0(double ebn0_db, const ModulationConfig& cfg) {
    const double spreading = spreading_factor_db(cfg);
    return LinkBudget{ebn0_db - spreading, ebn0_db, spreading};
}

} // namespace bpk
