#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>

#include <json.hpp>

#include "bpk/dataset.hpp"
#include "bpk/eval.hpp"
#include "bpk/modem.hpp"
#include "bpk/nn/model.hpp"
#include "bpk/nn/train.hpp"

namespace bpk {

/// Everything the end-to-end experiment needs; the defaults reproduce the
/// reference setup (r 3.7/3.75, 4096 samples per bit at 11025 Hz, Eb/N0
/// 20 dB, splits 12800/3200/4000).
struct ExperimentConfig {
    ModulationConfig mod;
    double ebn0_db = 20.0;
    SplitSizes sizes;
    /// Multiplies every split size (smoke runs use e.g. 0.25).
    double scale = 1.0;
    nn::ModelConfig model;
    nn::TrainConfig train;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "out";

    /// Split sizes after applying `scale` (at least 1 record each).
    SplitSizes scaled_sizes() const;
    void validate() const;
};

/// Config file / effective-config serialization; keys mirror the CLI flags.
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);
void experiment_from_json(const nlohmann::json& j, ExperimentConfig& cfg);

nlohmann::json report_to_json(const Report& r, double ber_value);

struct MethodMetrics {
    Report rep;
    double ber = 0.0;
    std::vector<std::uint8_t> predictions;
};

struct PipelineResult {
    MethodMetrics cnn;
    MethodMetrics baseline;
    nn::History history;
    DatasetMeta dataset_meta;
};

/// dataset -> train -> score (CNN and the least-squares baseline).
/// Writes dataset/, weights.chnn, history.json, metrics.json, report.txt
/// and effective_config.json under cfg.out_dir; artifacts are byte-stable
/// for a fixed seed. Progress lines go to `log`.
PipelineResult run_pipeline(const ExperimentConfig& cfg, std::ostream& log);

/// The derived per-stage seeds (documented so runs can be reproduced piece
/// by piece): stream 0 of the master seed feeds the dataset, stream 1 the
/// weight initialization, stream 2 the epoch shuffles.
struct DerivedSeeds {
    std::uint64_t dataset;
    std::uint64_t init;
    std::uint64_t shuffle;
};
DerivedSeeds derive_seeds(std::uint64_t master_seed);

} // namespace bpk
