// bpk: command-line front end for the chaotic bifurcation-parameter-keying
// workbench. Subcommands cover the individual stages (bifurcation, modulate,
// impair, dataset, train, demod, evaluate) and the end-to-end `pipeline`.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bpk/baseline.hpp"
#include "bpk/channel.hpp"
#include "bpk/chaos.hpp"
#include "bpk/dataset.hpp"
#include "bpk/eval.hpp"
#include "bpk/experiment.hpp"
#include "bpk/modem.hpp"
#include "bpk/nn/model.hpp"
#include "bpk/nn/train.hpp"
#include "bpk/rng.hpp"

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    return out;
}

void dump_effective_config(const nlohmann::json& j, const fs::path& dir) {
    fs::create_directories(dir);
    auto out = open_out(dir / "effective_config.json");
    out << j.dump(2) << '\n';
}

// Writes effective_config.json next to a file artifact (skipped for stdout).
void dump_effective_config_beside(const nlohmann::json& j,
                                  const std::string& out_file) {
    if (out_file.empty() || out_file == "-") return;
    fs::path dir = fs::path(out_file).parent_path();
    if (dir.empty()) dir = ".";
    dump_effective_config(j, dir);
}

bpk::BitStream parse_bits(const std::string& text) {
    bpk::BitStream bits;
    bits.reserve(text.size());
    for (char ch : text) {
        if (ch == '0') {
            bits.push_back(0);
        } else if (ch == '1') {
            bits.push_back(1);
        } else {
            throw std::runtime_error(std::string("invalid bit symbol '") + ch +
                                     "' (expected 0/1)");
        }
    }
    return bits;
}

void write_signal_csv(std::ostream& out, const bpk::BasebandSignal& s) {
    out << "index,value\n";
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        out << i << ',' << fmt_double(s.samples[i]) << '\n';
    }
}

bpk::BasebandSignal read_signal_csv(const fs::path& path, double sample_rate) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    bpk::BasebandSignal s;
    s.sample_rate = sample_rate;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.starts_with("index")) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(path.string() + ": malformed CSV line: " + line);
        }
        s.samples.push_back(std::stod(line.substr(comma + 1)));
    }
    return s;
}

// --config is honored before regular flag parsing so explicit flags win.
bpk::ExperimentConfig preload_config(int argc, char** argv) {
    bpk::ExperimentConfig cfg;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        std::string path;
        if (arg == "--config" && i + 1 < argc) {
            path = argv[i + 1];
        } else if (arg.starts_with("--config=")) {
            path = arg.substr(9);
        } else {
            continue;
        }
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot open config file " + path);
        }
        nlohmann::json j;
        in >> j;
        bpk::experiment_from_json(j, cfg);
    }
    return cfg;
}

void add_mod_flags(CLI::App* cmd, bpk::ModulationConfig& mod) {
    cmd->add_option("--r-space", mod.r_space, "bifurcation parameter for bit 0")
        ->capture_default_str();
    cmd->add_option("--r-mark", mod.r_mark, "bifurcation parameter for bit 1")
        ->capture_default_str();
    cmd->add_option("--samples-per-bit", mod.samples_per_bit,
                    "chip samples per bit")
        ->capture_default_str();
    cmd->add_option("--sample-rate", mod.sample_rate, "sample rate in Hz")
        ->capture_default_str();
}

void print_pipeline_summary(const bpk::PipelineResult& result,
                            const fs::path& out_dir) {
    std::cout << "CNN demodulator\n"
              << bpk::format_report(result.cnn.rep)
              << "ber: " << fmt_double(result.cnn.ber) << "\n\n"
              << "Least-squares baseline\n"
              << bpk::format_report(result.baseline.rep)
              << "ber: " << fmt_double(result.baseline.ber) << "\n\n"
              << "artifacts in " << out_dir.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chaotic bifurcation-parameter-keying workbench"};
    app.require_subcommand(1);

    try {
        bpk::ExperimentConfig cfg = preload_config(argc, argv);
        std::string config_dummy; // consumed by preload_config

        // ------------------------------------------------ bifurcation
        auto* bif = app.add_subcommand(
            "bifurcation", "emit the logistic-map bifurcation diagram as CSV");
        double r_min = 2.8, r_max = 4.0;
        std::size_t r_steps = 1200, bif_transient = 500, keep = 200;
        std::string bif_out = "-";
        bif->add_option("--r-min", r_min)->capture_default_str();
        bif->add_option("--r-max", r_max)->capture_default_str();
        bif->add_option("--r-steps", r_steps)->capture_default_str();
        bif->add_option("--transient", bif_transient)->capture_default_str();
        bif->add_option("--keep", keep)->capture_default_str();
        bif->add_option("--out", bif_out, "output CSV ('-' for stdout)")
            ->capture_default_str();
        bif->callback([&]() {
            const auto points =
                bpk::bifurcation_diagram(r_min, r_max, r_steps, bif_transient, keep);
            auto emit = [&](std::ostream& out) {
                out << "r,x\n";
                for (const auto& p : points) {
                    out << fmt_double(p.r) << ',' << fmt_double(p.x) << '\n';
                }
            };
            if (bif_out == "-") {
                emit(std::cout);
            } else {
                auto out = open_out(bif_out);
                emit(out);
                dump_effective_config_beside(
                    nlohmann::json{{"r_min", r_min},
                                   {"r_max", r_max},
                                   {"r_steps", r_steps},
                                   {"transient", bif_transient},
                                   {"keep", keep}},
                    bif_out);
            }
        });

        // ------------------------------------------------ modulate
        auto* mod_cmd = app.add_subcommand(
            "modulate", "map an ASCII bit string onto a chaotic baseband wave");
        std::string bits_text;
        double x0 = 0.3;
        bool reseed = false;
        std::uint64_t mod_seed = 0;
        std::string mod_format = "csv";
        std::string mod_out = "-";
        bpk::ModulationConfig mod_cfg;
        mod_cmd->add_option("--bits", bits_text, "bit string, e.g. 0110")
            ->required();
        mod_cmd->add_option("--x0", x0, "initial map state in (0,1)")
            ->capture_default_str();
        mod_cmd->add_flag("--reseed-per-bit", reseed,
                          "fresh uniform x0 per bit (ablation mode)");
        mod_cmd->add_option("--seed", mod_seed, "seed for --reseed-per-bit")
            ->capture_default_str();
        mod_cmd->add_option("--format", mod_format, "csv or chds")
            ->check(CLI::IsMember({"csv", "chds"}))
            ->capture_default_str();
        mod_cmd->add_option("--out", mod_out, "output file ('-' for stdout CSV)")
            ->capture_default_str();
        add_mod_flags(mod_cmd, mod_cfg);
        mod_cmd->callback([&]() {
            const bpk::BitStream bits = parse_bits(bits_text);
            bpk::BasebandSignal signal;
            if (reseed) {
                bpk::SeededGenerator g(mod_seed);
                signal = bpk::modulate_reseed(bits, mod_cfg, g);
            } else {
                signal = bpk::modulate(bits, mod_cfg, x0);
            }
            const nlohmann::json eff{{"bits", bits_text},
                                     {"x0", x0},
                                     {"reseed_per_bit", reseed},
                                     {"seed", mod_seed},
                                     {"format", mod_format},
                                     {"r_space", mod_cfg.r_space},
                                     {"r_mark", mod_cfg.r_mark},
                                     {"samples_per_bit", mod_cfg.samples_per_bit},
                                     {"sample_rate", mod_cfg.sample_rate}};
            if (mod_format == "chds") {
                if (mod_out == "-") {
                    throw std::runtime_error("--format chds requires --out FILE");
                }
                std::vector<bpk::LabeledWindow> records(bits.size());
                for (std::size_t i = 0; i < bits.size(); ++i) {
                    records[i].label = bits[i];
                    records[i].window.resize(mod_cfg.samples_per_bit);
                    for (std::size_t s = 0; s < mod_cfg.samples_per_bit; ++s) {
                        records[i].window[s] = static_cast<float>(
                            signal.samples[i * mod_cfg.samples_per_bit + s]);
                    }
                }
                bpk::save_split_file(records, mod_out);
                dump_effective_config_beside(eff, mod_out);
            } else if (mod_out == "-") {
                write_signal_csv(std::cout, signal);
            } else {
                auto out = open_out(mod_out);
                write_signal_csv(out, signal);
                dump_effective_config_beside(eff, mod_out);
            }
        });

        // ------------------------------------------------ impair
        auto* imp = app.add_subcommand(
            "impair", "add calibrated white Gaussian noise to a waveform CSV");
        std::string imp_in;
        std::string imp_out = "-";
        std::uint64_t imp_seed = 0;
        double snr_db = 0.0, ebn0_db = 0.0;
        bpk::ModulationConfig imp_cfg;
        imp->add_option("--in", imp_in, "input waveform CSV")->required();
        imp->add_option("--out", imp_out, "output CSV ('-' for stdout)")
            ->capture_default_str();
        imp->add_option("--seed", imp_seed)->capture_default_str();
        auto* snr_opt = imp->add_option("--snr-db", snr_db, "target SNR in dB");
        auto* ebn0_opt =
            imp->add_option("--ebn0-db", ebn0_db, "target Eb/N0 in dB");
        snr_opt->excludes(ebn0_opt);
        ebn0_opt->excludes(snr_opt);
        imp->add_option("--samples-per-bit", imp_cfg.samples_per_bit,
                        "needed to convert Eb/N0 to SNR")
            ->capture_default_str();
        imp->callback([&]() {
            if (!*snr_opt && !*ebn0_opt) {
                throw CLI::RequiredError("--snr-db or --ebn0-db");
            }
            const double target_snr =
                *snr_opt ? snr_db : bpk::ebn0_to_snr(ebn0_db, imp_cfg);
            const bpk::BasebandSignal in =
                read_signal_csv(imp_in, imp_cfg.sample_rate);
            bpk::SeededGenerator g(imp_seed);
            const bpk::BasebandSignal noisy = bpk::awgn(in, target_snr, g);
            const nlohmann::json eff{{"in", imp_in},
                                     {"seed", imp_seed},
                                     {"snr_db", target_snr},
                                     {"samples_per_bit", imp_cfg.samples_per_bit}};
            if (imp_out == "-") {
                write_signal_csv(std::cout, noisy);
            } else {
                auto out = open_out(imp_out);
                write_signal_csv(out, noisy);
                dump_effective_config_beside(eff, imp_out);
            }
        });

        // ------------------------------------------------ dataset
        auto* ds = app.add_subcommand(
            "dataset", "generate the labeled noisy window dataset");
        std::string ds_out_dir = "out/dataset";
        ds->add_option("--out-dir", ds_out_dir)->capture_default_str();
        ds->add_option("--seed", cfg.seed)->capture_default_str();
        ds->add_option("--ebn0-db", cfg.ebn0_db)->capture_default_str();
        ds->add_option("--n-train", cfg.sizes.n_train)->capture_default_str();
        ds->add_option("--n-val", cfg.sizes.n_val)->capture_default_str();
        ds->add_option("--n-test", cfg.sizes.n_test)->capture_default_str();
        ds->add_option("--scale", cfg.scale,
                       "multiplies all split sizes (0.25 = smoke test)")
            ->capture_default_str();
        ds->add_option("--config", config_dummy, "JSON config file");
        add_mod_flags(ds, cfg.mod);
        ds->callback([&]() {
            cfg.model.input_len = cfg.mod.samples_per_bit;
            const auto seeds = bpk::derive_seeds(cfg.seed);
            const auto data = bpk::generate_dataset(
                cfg.mod, cfg.ebn0_db, cfg.scaled_sizes(), seeds.dataset);
            bpk::save_dataset(data, ds_out_dir);
            dump_effective_config(bpk::experiment_to_json(cfg), ds_out_dir);
            std::cout << "wrote " << data.train.size() << "/" << data.val.size()
                      << "/" << data.test.size() << " records to " << ds_out_dir
                      << "\n";
        });

        // ------------------------------------------------ train
        auto* tr = app.add_subcommand("train", "train the CNN demodulator");
        std::string tr_dataset;
        std::string out_weights = "out/weights.chnn";
        std::string history_json = "out/history.json";
        tr->add_option("--dataset", tr_dataset, "dataset directory")->required();
        tr->add_option("--epochs", cfg.train.epochs)->capture_default_str();
        tr->add_option("--batch-size", cfg.train.batch_size)
            ->capture_default_str();
        tr->add_option("--lr", cfg.train.lr)->capture_default_str();
        tr->add_option("--patience", cfg.train.patience)->capture_default_str();
        tr->add_option("--seed", cfg.seed)->capture_default_str();
        tr->add_option("--out-weights", out_weights)->capture_default_str();
        tr->add_option("--history-json", history_json)->capture_default_str();
        tr->add_option("--conv-filters", cfg.model.conv_filters)
            ->capture_default_str();
        tr->add_option("--conv-kernel", cfg.model.conv_kernel)
            ->capture_default_str();
        tr->add_option("--dense-units", cfg.model.dense_units)
            ->capture_default_str();
        tr->add_option("--config", config_dummy, "JSON config file");
        tr->callback([&]() {
            const bpk::DatasetSplit data = bpk::load_dataset(tr_dataset);
            cfg.mod = data.meta.mod;
            cfg.model.input_len = data.meta.mod.samples_per_bit;
            const auto seeds = bpk::derive_seeds(cfg.seed);
            auto model = bpk::nn::build_model<float>(cfg.model, seeds.init);
            std::cout << bpk::nn::format_summary(
                bpk::nn::parameter_counts(cfg.model));
            bpk::nn::TrainConfig tc = cfg.train;
            tc.shuffle_seed = seeds.shuffle;
            const auto history = bpk::nn::fit(model, data, tc, &std::cerr);
            fs::path weights_path(out_weights);
            if (weights_path.has_parent_path()) {
                fs::create_directories(weights_path.parent_path());
            }
            bpk::nn::save_weights(model, weights_path);
            nlohmann::json hist{{"best_epoch", history.best_epoch},
                                {"best_val_accuracy", history.best_val_accuracy},
                                {"epochs", nlohmann::json::array()}};
            for (const auto& e : history.epochs) {
                hist["epochs"].push_back({{"epoch", e.epoch},
                                          {"train_loss", e.train_loss},
                                          {"val_loss", e.val_loss},
                                          {"val_accuracy", e.val_accuracy}});
            }
            fs::path hist_path(history_json);
            if (hist_path.has_parent_path()) {
                fs::create_directories(hist_path.parent_path());
            }
            auto out = open_out(hist_path);
            out << hist.dump(2) << '\n';
            dump_effective_config_beside(bpk::experiment_to_json(cfg),
                                         out_weights);
            std::cout << "best epoch " << history.best_epoch << " (val acc "
                      << fmt_double(history.best_val_accuracy) << "), weights in "
                      << out_weights << "\n";
        });

        // ------------------------------------------------ demod
        auto* dm = app.add_subcommand(
            "demod", "demodulate dataset windows with the CNN or the baseline");
        std::string dm_dataset, dm_in, dm_weights;
        std::string dm_method = "cnn";
        std::string dm_out = "-";
        bpk::BaselineConfig bl_cfg;
        auto* dm_ds_opt =
            dm->add_option("--dataset", dm_dataset, "dataset dir (test split)");
        auto* dm_in_opt = dm->add_option("--in", dm_in, "single .chds file");
        dm_ds_opt->excludes(dm_in_opt);
        dm_in_opt->excludes(dm_ds_opt);
        dm->add_option("--method", dm_method, "cnn or baseline")
            ->check(CLI::IsMember({"cnn", "baseline"}))
            ->capture_default_str();
        dm->add_option("--weights", dm_weights, "weight file (cnn)");
        dm->add_option("--out", dm_out, "predictions CSV ('-' for stdout)")
            ->capture_default_str();
        dm->add_option("--r-space", bl_cfg.r_space)->capture_default_str();
        dm->add_option("--r-mark", bl_cfg.r_mark)->capture_default_str();
        dm->callback([&]() {
            std::vector<bpk::LabeledWindow> records;
            if (*dm_ds_opt) {
                records = bpk::load_split_file(fs::path(dm_dataset) / "test.chds");
            } else if (*dm_in_opt) {
                records = bpk::load_split_file(dm_in);
            } else {
                throw CLI::RequiredError("--dataset or --in");
            }
            std::vector<std::uint8_t> pred;
            if (dm_method == "cnn") {
                if (dm_weights.empty()) {
                    throw CLI::RequiredError("--weights (for --method cnn)");
                }
                const auto model = bpk::nn::load_weights(dm_weights);
                pred = bpk::nn::classify_records(model, records);
            } else {
                pred.resize(records.size());
                for (std::size_t i = 0; i < records.size(); ++i) {
                    pred[i] = bpk::demod_baseline(
                        std::span<const float>(records[i].window), bl_cfg);
                }
            }
            auto emit = [&](std::ostream& out) {
                out << "index,truth,pred\n";
                for (std::size_t i = 0; i < pred.size(); ++i) {
                    out << i << ',' << int(records[i].label) << ','
                        << int(pred[i]) << '\n';
                }
            };
            if (dm_out == "-") {
                emit(std::cout);
            } else {
                auto out = open_out(dm_out);
                emit(out);
            }
            std::vector<std::uint8_t> truth(records.size());
            for (std::size_t i = 0; i < records.size(); ++i) {
                truth[i] = records[i].label;
            }
            std::cerr << "accuracy "
                      << fmt_double(1.0 - bpk::ber(truth, pred)) << ", ber "
                      << fmt_double(bpk::ber(truth, pred)) << "\n";
        });

        // ------------------------------------------------ evaluate
        auto* ev = app.add_subcommand(
            "evaluate", "score a predictions CSV (classification report + BER)");
        std::string ev_pred;
        std::string ev_report = "-";
        std::string ev_json;
        ev->add_option("--pred", ev_pred, "predictions CSV from demod")
            ->required();
        ev->add_option("--report", ev_report, "text report path ('-' stdout)")
            ->capture_default_str();
        ev->add_option("--json", ev_json, "metrics.json path");
        ev->callback([&]() {
            std::ifstream in(ev_pred);
            if (!in) {
                throw std::runtime_error("cannot open " + ev_pred);
            }
            std::vector<std::uint8_t> truth, pred;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line.starts_with("index")) continue;
                std::size_t idx, t, p;
                std::istringstream row(line);
                char comma;
                if (!(row >> idx >> comma >> t >> comma >> p)) {
                    throw std::runtime_error(ev_pred + ": malformed line: " + line);
                }
                truth.push_back(static_cast<std::uint8_t>(t));
                pred.push_back(static_cast<std::uint8_t>(p));
            }
            const auto rep = bpk::report(bpk::confusion(truth, pred));
            const double bit_error_rate = bpk::ber(truth, pred);
            const std::string text = bpk::format_report(rep) +
                                     "ber: " + fmt_double(bit_error_rate) + "\n";
            if (ev_report == "-") {
                std::cout << text;
            } else {
                open_out(ev_report) << text;
            }
            if (!ev_json.empty()) {
                open_out(ev_json)
                    << bpk::report_to_json(rep, bit_error_rate).dump(2) << '\n';
            }
        });

        // ------------------------------------------------ pipeline
        auto* pl = app.add_subcommand(
            "pipeline", "dataset -> train -> evaluate (CNN and baseline)");
        std::string pl_out_dir = "out";
        pl->add_option("--out-dir", pl_out_dir)->capture_default_str();
        pl->add_option("--seed", cfg.seed)->capture_default_str();
        pl->add_option("--ebn0-db", cfg.ebn0_db)->capture_default_str();
        pl->add_option("--n-train", cfg.sizes.n_train)->capture_default_str();
        pl->add_option("--n-val", cfg.sizes.n_val)->capture_default_str();
        pl->add_option("--n-test", cfg.sizes.n_test)->capture_default_str();
        pl->add_option("--scale", cfg.scale,
                       "multiplies all split sizes (0.25 = smoke test)")
            ->capture_default_str();
        pl->add_option("--epochs", cfg.train.epochs)->capture_default_str();
        pl->add_option("--batch-size", cfg.train.batch_size)
            ->capture_default_str();
        pl->add_option("--lr", cfg.train.lr)->capture_default_str();
        pl->add_option("--patience", cfg.train.patience)->capture_default_str();
        pl->add_option("--conv-filters", cfg.model.conv_filters)
            ->capture_default_str();
        pl->add_option("--conv-kernel", cfg.model.conv_kernel)
            ->capture_default_str();
        pl->add_option("--dense-units", cfg.model.dense_units)
            ->capture_default_str();
        pl->add_option("--config", config_dummy, "JSON config file");
        add_mod_flags(pl, cfg.mod);
        pl->callback([&]() {
            cfg.out_dir = pl_out_dir;
            cfg.model.input_len = cfg.mod.samples_per_bit;
            const auto result = bpk::run_pipeline(cfg, std::cerr);
            print_pipeline_summary(result, cfg.out_dir);
        });

        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
