#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bpk/modem.hpp"

namespace bpk {

/// One bit period of noisy baseband plus its transmitted bit. Windows are
/// stored as float32; generation runs in float64 upstream.
struct LabeledWindow {
    std::vector<float> window;
    std::uint8_t label = 0;

    bool operator==(const LabeledWindow&) const = default;
};

struct DatasetMeta {
    ModulationConfig mod;
    double ebn0_db = 20.0;
    double snr_db = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const DatasetMeta&) const = default;
};

struct DatasetSplit {
    std::vector<LabeledWindow> train;
    std::vector<LabeledWindow> val;
    std::vector<LabeledWindow> test;
    DatasetMeta meta;
};

struct SplitSizes {
    std::size_t n_train = 12800;
    std::size_t n_val = 3200;
    std::size_t n_test = 4000;
};

/// Builds the three splits. Record i (indexed globally across
/// train|val|test) uses the derived stream i of `seed` for its label
/// (Bernoulli 0.5), its x0 (uniform in (0.01, 0.99)) and its noise, so
/// records are order-independent and reproducible in isolation.
DatasetSplit generate_dataset(const ModulationConfig& mod_cfg, double ebn0_db,
                              const SplitSizes& sizes, std::uint64_t seed);

/// Writes train.chds / val.chds / test.chds plus meta.json under `dir`.
/// Record file layout (little-endian): magic "CHDS", version u16 = 1,
/// window_len u32, record count u64, then per record a label byte followed
/// by window_len float32 values.
void save_dataset(const DatasetSplit& d, const std::filesystem::path& dir);

DatasetSplit load_dataset(const std::filesystem::path& dir);

/// Single split-file IO, used by the CLI when windows are exported outside
/// a full dataset directory.
void save_split_file(const std::vector<LabeledWindow>& records,
                     const std::filesystem::path& file);
std::vector<LabeledWindow> load_split_file(const std::filesystem::path& file);

/// 0 -> (1,0), 1 -> (0,1). Throws std::invalid_argument otherwise.
std::array<float, 2> one_hot(std::uint8_t label);

} // namespace bpk
