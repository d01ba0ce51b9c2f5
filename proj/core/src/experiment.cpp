#include "bpk/experiment.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "bpk/baseline.hpp"
#include "bpk/channel.hpp"
#include "bpk/rng.hpp"

namespace bpk {

SplitSizes ExperimentConfig::scaled_sizes() const {
    auto apply = [this](std::size_t n) {
        const auto scaled = static_cast<std::size_t>(
            std::llround(static_cast<double>(n) * scale));
        return std::max<std::size_t>(1, scaled);
    };
    return SplitSizes{apply(sizes.n_train), apply(sizes.n_val),
                      apply(sizes.n_test)};
}

void ExperimentConfig::validate() const {
    mod.validate();
    model.validate();
    train.validate();
    if (!(scale > 0.0)) {
        throw std::invalid_argument("ExperimentConfig: scale must be positive");
    }
    if (model.input_len != mod.samples_per_bit) {
        throw std::invalid_argument(
            "ExperimentConfig: model input_len must equal samples_per_bit");
    }
}

nlohmann::json experiment_to_json(const ExperimentConfig& cfg) {
    return nlohmann::json{
        {"seed", cfg.seed},
        {"r_space", cfg.mod.r_space},
        {"r_mark", cfg.mod.r_mark},
        {"samples_per_bit", cfg.mod.samples_per_bit},
        {"sample_rate", cfg.mod.sample_rate},
        {"ebn0_db", cfg.ebn0_db},
        {"n_train", cfg.sizes.n_train},
        {"n_val", cfg.sizes.n_val},
        {"n_test", cfg.sizes.n_test},
        {"scale", cfg.scale},
        {"conv_filters", cfg.model.conv_filters},
        {"conv_kernel", cfg.model.conv_kernel},
        {"dense_units", cfg.model.dense_units},
        {"bn_epsilon", cfg.model.bn_epsilon},
        {"bn_momentum", cfg.model.bn_momentum},
        {"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"lr", cfg.train.lr},
        {"patience", cfg.train.patience},
    };
}

void experiment_from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    auto opt = [&j](const char* key, auto& field) {
        if (j.contains(key)) {
            field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        }
    };
    opt("seed", cfg.seed);
    opt("r_space", cfg.mod.r_space);
    opt("r_mark", cfg.mod.r_mark);
    opt("samples_per_bit", cfg.mod.samples_per_bit);
    opt("sample_rate", cfg.mod.sample_rate);
    opt("ebn0_db", cfg.ebn0_db);
    opt("n_train", cfg.sizes.n_train);
    opt("n_val", cfg.sizes.n_val);
    opt("n_test", cfg.sizes.n_test);
    opt("scale", cfg.scale);
    opt("conv_filters", cfg.model.conv_filters);
    opt("conv_kernel", cfg.model.conv_kernel);
    opt("dense_units", cfg.model.dense_units);
    opt("bn_epsilon", cfg.model.bn_epsilon);
    opt("bn_momentum", cfg.model.bn_momentum);
    opt("epochs", cfg.train.epochs);
    opt("batch_size", cfg.train.batch_size);
    opt("lr", cfg.train.lr);
    opt("patience", cfg.train.patience);
    cfg.model.input_len = cfg.mod.samples_per_bit;
}

nlohmann::json report_to_json(const Report& r, double ber_value) {
    return nlohmann::json{
        {"accuracy", r.accuracy},
        {"ber", ber_value},
        {"precision", r.precision},
        {"recall", r.recall},
        {"f1", r.f1},
        {"support", r.support},
        {"macro",
         {{"precision", r.macro_precision},
          {"recall", r.macro_recall},
          {"f1", r.macro_f1}}},
        {"weighted",
         {{"precision", r.weighted_precision},
          {"recall", r.weighted_recall},
          {"f1", r.weighted_f1}}},
        {"total", r.total},
        {"degenerate", r.degenerate},
    };
}

DerivedSeeds derive_seeds(std::uint64_t master_seed) {
    const SeededGenerator base(master_seed);
    return DerivedSeeds{base.derived_seed(0), base.derived_seed(1),
                        base.derived_seed(2)};
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << text;
}

std::vector<std::uint8_t> labels_of(const std::vector<LabeledWindow>& recs) {
    std::vector<std::uint8_t> out(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) out[i] = recs[i].label;
    return out;
}

} // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg_in, std::ostream& log) {
    ExperimentConfig cfg = cfg_in;
    cfg.model.input_len = cfg.mod.samples_per_bit;
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "effective_config.json",
               experiment_to_json(cfg).dump(2) + "\n");

    const DerivedSeeds seeds = derive_seeds(cfg.seed);
    const SplitSizes sizes = cfg.scaled_sizes();

    log << "generating dataset (" << sizes.n_train << "/" << sizes.n_val << "/"
        << sizes.n_test << " records, Eb/N0 " << cfg.ebn0_db << " dB)"
        << std::endl;
    const DatasetSplit data =
        generate_dataset(cfg.mod, cfg.ebn0_db, sizes, seeds.dataset);
    save_dataset(data, cfg.out_dir / "dataset");

    log << "building model (" << nn::parameter_counts(cfg.model).total
        << " parameters)" << std::endl;
    nn::Model<float> model = nn::build_model<float>(cfg.model, seeds.init);

    nn::TrainConfig tc = cfg.train;
    tc.shuffle_seed = seeds.shuffle;
    const nn::History history = nn::fit(model, data, tc, &log);

    nlohmann::json hist_json;
    hist_json["best_epoch"] = history.best_epoch;
    hist_json["best_val_accuracy"] = history.best_val_accuracy;
    hist_json["epochs"] = nlohmann::json::array();
    for (const nn::EpochStats& e : history.epochs) {
        hist_json["epochs"].push_back({{"epoch", e.epoch},
                                       {"train_loss", e.train_loss},
                                       {"val_loss", e.val_loss},
                                       {"val_accuracy", e.val_accuracy}});
    }
    write_text(cfg.out_dir / "history.json", hist_json.dump(2) + "\n");
    nn::save_weights(model, cfg.out_dir / "weights.chnn");

    log << "scoring test split (" << data.test.size() << " records)"
        << std::endl;
    const std::vector<std::uint8_t> truth = labels_of(data.test);

    PipelineResult result;
    result.dataset_meta = data.meta;
    result.history = history;

    result.cnn.predictions = nn::classify_records(model, data.test,
                                                  cfg.train.batch_size);
    result.cnn.rep = report(confusion(truth, result.cnn.predictions));
    result.cnn.ber = ber(truth, result.cnn.predictions);

    const BaselineConfig bl{cfg.mod.r_space, cfg.mod.r_mark};
    result.baseline.predictions.resize(data.test.size());
    for (std::size_t i = 0; i < data.test.size(); ++i) {
        result.baseline.predictions[i] =
            demod_baseline(std::span<const float>(data.test[i].window), bl);
    }
    result.baseline.rep = report(confusion(truth, result.baseline.predictions));
    result.baseline.ber = ber(truth, result.baseline.predictions);

    nlohmann::json metrics{
        {"cnn", report_to_json(result.cnn.rep, result.cnn.ber)},
        {"baseline", report_to_json(result.baseline.rep, result.baseline.ber)},
    };
    write_text(cfg.out_dir / "metrics.json", metrics.dump(2) + "\n");

    std::string report_text = "CNN demodulator\n";
    report_text += format_report(result.cnn.rep);
    report_text += "\nLeast-squares baseline\n";
    report_text += format_report(result.baseline.rep);
    write_text(cfg.out_dir / "report.txt", report_text);

    log << "cnn accuracy " << result.cnn.rep.accuracy << " (ber "
        << result.cnn.ber << "), baseline accuracy "
        << result.baseline.rep.accuracy << " (ber " << result.baseline.ber
        << ")" << std::endl;
    return result;
}

} // namespace bpk
