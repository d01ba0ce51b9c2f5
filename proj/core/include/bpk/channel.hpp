#pragma once

#include "bpk/modem.hpp"
#include "bpk/rng.hpp"

namespace bpk {

/// How "signal power" is measured when calibrating noise. The chaotic
/// carrier rides on a large DC offset that carries no information, so the
/// default removes the mean; the raw mean square is kept as an alternative.
enum class PowerConvention {
    ac_variance,
    mean_square,
};

/// SNR / Eb/N0 / processing-gain triple, consistent by construction:
/// ebn0_db = snr_db + spreading_db.
struct LinkBudget {
    double snr_db;
    double ebn0_db;
    double spreading_db;
};

/// Power of the signal under the given convention. Requires at least two
/// samples; throws std::domain_error otherwise.
double signal_power(const BasebandSignal& s,
                    PowerConvention convention = PowerConvention::ac_variance);

/// Adds i.i.d. zero-mean Gaussian noise calibrated against the measured
/// power of `s` so the output hits `snr_db` exactly in expectation.
/// Throws std::domain_error on zero-power input (SNR undefined).
BasebandSignal awgn(const BasebandSignal& s, double snr_db, SeededGenerator& g,
                    PowerConvention convention = PowerConvention::ac_variance);

/// Adds i.i.d. zero-mean Gaussian noise of the given standard deviation.
BasebandSignal add_noise(const BasebandSignal& s, double sigma,
                         SeededGenerator& g);

/// Long-run power of the keyed carrier, averaged over the two bifurcation
/// parameters. Dataset noise is scaled against this constant rather than
/// each record's own power: noise in a real channel does not know which
/// symbol was sent, and per-record calibration would leak the label through
/// the noise variance.
double nominal_carrier_power(
    const ModulationConfig& cfg,
    PowerConvention convention = PowerConvention::ac_variance);

/// Processing gain 10*log10(B * Tb) = 10*log10(samples_per_bit / 2);
/// 33.11 dB for the defaults.
double spreading_factor_db(const ModulationConfig& cfg);

double ebn0_to_snr(double ebn0_db, const ModulationConfig& cfg);
double snr_to_ebn0(double snr_db, const ModulationConfig& cfg);

LinkBudget link_budget_from_ebn0(double ebn0_db, const ModulationConfig& cfg);

} // namespace bpk
