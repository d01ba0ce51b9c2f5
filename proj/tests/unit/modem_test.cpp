#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bpk/chaos.hpp"
#include "bpk/modem.hpp"
#include "bpk/rng.hpp"

using namespace bpk;

namespace {

// independent re-iteration oracle: burn kDefaultTransient steps at r_space
// from x0, then iterate per bit
std::vector<double> reiterate(const BitStream& bits,
                              const ModulationConfig& cfg, double x0) {
    double x = x0;
    for (std::size_t i = 0; i < kDefaultTransient; ++i) {
        x = cfg.r_space * x * (1.0 - x);
    }
    std::vector<double> out;
    for (auto bit : bits) {
        const double r = bit ? cfg.r_mark : cfg.r_space;
        for (std::size_t i = 0; i < cfg.samples_per_bit; ++i) {
            x = r * x * (1.0 - x);
            out.push_back(x);
        }
    }
    return out;
}

} // namespace

TEST_SUITE("modem") {

TEST_CASE("config validation") {
    ModulationConfig ok;
    CHECK_NOTHROW(ok.validate());
    ModulationConfig same = ok;
    same.r_mark = same.r_space;
    CHECK_THROWS_AS(same.validate(), std::invalid_argument);
    ModulationConfig low = ok;
    low.r_space = 3.2; // periodic regime
    CHECK_THROWS_AS(low.validate(), std::invalid_argument);
    ModulationConfig zero = ok;
    zero.samples_per_bit = 0;
    CHECK_THROWS_AS(zero.validate(), std::invalid_argument);
    ModulationConfig rate = ok;
    rate.sample_rate = 0.0;
    CHECK_THROWS_AS(rate.validate(), std::invalid_argument);
}

TEST_CASE("single space bit matches the re-iteration oracle") {
    ModulationConfig cfg;
    const auto sig = modulate({0}, cfg, 0.3);
    REQUIRE(sig.samples.size() == 4096);
    const auto oracle = reiterate({0}, cfg, 0.3);
    for (std::size_t i = 0; i < sig.samples.size(); ++i) {
        CHECK(sig.samples[i] == oracle[i]);
    }
}

TEST_CASE("empty bit stream gives an empty signal") {
    const auto sig = modulate({}, ModulationConfig{}, 0.3);
    CHECK(sig.samples.empty());
    CHECK(sig.sample_rate == 11025.0);
}

TEST_CASE("space/mark pair: per-segment rates with continuous state") {
    ModulationConfig cfg;
    const auto sig = modulate({0, 1}, cfg, 0.42);
    REQUIRE(sig.samples.size() == 8192);
    const auto oracle = reiterate({0, 1}, cfg, 0.42);
    for (std::size_t i = 0; i < 8192; ++i) {
        CHECK(sig.samples[i] == oracle[i]);
    }
    // the mark half's first sample continues from the space half's last
    CHECK(sig.samples[4096] ==
          logistic_step(sig.samples[4095], cfg.r_mark));
}

TEST_CASE("segment oracle equivalence on multi-bit messages") {
    ModulationConfig cfg;
    cfg.samples_per_bit = 64;
    const BitStream bits{1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 0, 0};
    const auto sig = modulate(bits, cfg, 0.77);
    const auto oracle = reiterate(bits, cfg, 0.77);
    REQUIRE(sig.samples.size() == bits.size() * 64);
    for (std::size_t i = 0; i < sig.samples.size(); ++i) {
        CHECK(sig.samples[i] == oracle[i]);
    }
}

TEST_CASE("length law and sample confinement") {
    ModulationConfig cfg;
    cfg.samples_per_bit = 97;
    SeededGenerator g(5);
    for (std::size_t len : {1u, 2u, 7u, 33u}) {
        BitStream bits(len);
        for (auto& b : bits) b = g.next_uniform() < 0.5 ? 0 : 1;
        const auto sig = modulate(bits, cfg, 0.3);
        CHECK(sig.samples.size() == len * 97);
        for (double s : sig.samples) {
            CHECK(s > 0.0);
            CHECK(s < 1.0);
        }
    }
}

TEST_CASE("modulate rejects bad inputs") {
    ModulationConfig cfg;
    CHECK_THROWS_AS(modulate({0, 2}, cfg, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(modulate({0}, cfg, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(modulate({0}, cfg, 1.0), std::invalid_argument);
}

TEST_CASE("modulate is deterministic") {
    ModulationConfig cfg;
    cfg.samples_per_bit = 256;
    const auto a = modulate({1, 0, 1}, cfg, 0.55);
    const auto b = modulate({1, 0, 1}, cfg, 0.55);
    CHECK(a.samples == b.samples);
}

TEST_CASE("reseed-per-bit mode is reproducible and differs from carry mode") {
    ModulationConfig cfg;
    cfg.samples_per_bit = 128;
    SeededGenerator g1(9), g2(9);
    const auto a = modulate_reseed({1, 0, 1, 1}, cfg, g1);
    const auto b = modulate_reseed({1, 0, 1, 1}, cfg, g2);
    CHECK(a.samples == b.samples);
    CHECK(a.samples.size() == 4 * 128);
    for (double s : a.samples) {
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
    const auto carried = modulate({1, 0, 1, 1}, cfg, 0.5);
    CHECK(a.samples != carried.samples);
}

TEST_CASE("link parameters at the default configuration") {
    const auto p = link_parameters(ModulationConfig{});
    CHECK(p.bit_duration_s == 4096.0 / 11025.0);
    CHECK(std::round(p.bit_duration_s * 1e4) / 1e4 == 0.3715);
    CHECK(p.bandwidth_hz == 5512.5);
    CHECK(p.bit_rate_bps == doctest::Approx(2.6916504).epsilon(1e-6));
    // midpoint-based deviation: 100 * 0.05 / 3.725
    CHECK(p.deviation_percent ==
          doctest::Approx(100.0 * 0.05 / 3.725).epsilon(1e-12));
    CHECK(std::round(p.deviation_percent * 100) / 100 == 1.34);
}

TEST_CASE("link parameters unit case") {
    ModulationConfig cfg;
    cfg.samples_per_bit = 11025;
    const auto p = link_parameters(cfg);
    CHECK(p.bit_duration_s == 1.0);
    CHECK(p.bit_rate_bps == 1.0);
}

} // TEST_SUITE
