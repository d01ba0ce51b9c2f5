#include "bpk/dataset.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "bpk/channel.hpp"
#include "binio.hpp"

namespace bpk {

namespace {

constexpr char kMagic[4] = {'C', 'H', 'D', 'S'};
constexpr std::uint16_t kVersion = 1;

LabeledWindow make_record(const ModulationConfig& cfg, double noise_sigma,
                          SeededGenerator g) {
    LabeledWindow rec;
    rec.label = g.next_uniform() < 0.5 ? 0 : 1;
    const double x0 = 0.01 + 0.98 * g.next_uniform();
    const BasebandSignal clean = modulate({rec.label}, cfg, x0);
    const BasebandSignal noisy = add_noise(clean, noise_sigma, g);
    rec.window.resize(noisy.samples.size());
    for (std::size_t i = 0; i < noisy.samples.size(); ++i) {
        rec.window[i] = static_cast<float>(noisy.samples[i]);
    }
    return rec;
}

void fill_split(std::vector<LabeledWindow>& out, std::size_t n,
                std::size_t first_index, const ModulationConfig& cfg,
                double noise_sigma, const SeededGenerator& base) {
    out.resize(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        out[static_cast<std::size_t>(i)] = make_record(
            cfg, noise_sigma,
            base.derive_stream(first_index + static_cast<std::size_t>(i)));
    }
}

} // namespace

DatasetSplit generate_dataset(const ModulationConfig& mod_cfg, double ebn0_db,
                              const SplitSizes& sizes, std::uint64_t seed) {
    mod_cfg.validate();
    if (sizes.n_train == 0 || sizes.n_val == 0 || sizes.n_test == 0) {
        throw std::invalid_argument("generate_dataset: split sizes must be positive");
    }
    DatasetSplit d;
    d.meta.mod = mod_cfg;
    d.meta.ebn0_db = ebn0_db;
    d.meta.snr_db = ebn0_to_snr(ebn0_db, mod_cfg);
    d.meta.seed = seed;

    // one symbol-independent noise level for the whole dataset
    const double sigma = std::sqrt(nominal_carrier_power(mod_cfg) /
                                   std::pow(10.0, d.meta.snr_db / 10.0));
    const SeededGenerator base(seed);
    fill_split(d.train, sizes.n_train, 0, mod_cfg, sigma, base);
    fill_split(d.val, sizes.n_val, sizes.n_train, mod_cfg, sigma, base);
    fill_split(d.test, sizes.n_test, sizes.n_train + sizes.n_val, mod_cfg,
               sigma, base);
    return d;
}

void save_split_file(const std::vector<LabeledWindow>& records,
                     const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + file.string() + " for writing");
    }
    const std::uint32_t window_len =
        records.empty() ? 0 : static_cast<std::uint32_t>(records[0].window.size());
    binio::put_bytes(out, kMagic, 4);
    binio::put_le(out, kVersion);
    binio::put_le(out, window_len);
    binio::put_le(out, static_cast<std::uint64_t>(records.size()));
    for (const LabeledWindow& rec : records) {
        if (rec.window.size() != window_len) {
            throw std::runtime_error("save_split_file: window length mismatch in " +
                                     file.string());
        }
        binio::put_le(out, rec.label);
        binio::put_f32_block(out, rec.window.data(), rec.window.size());
    }
    if (!out) {
        throw std::runtime_error("write failed for " + file.string());
    }
}

std::vector<LabeledWindow> load_split_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + file.string());
    }
    char magic[4];
    binio::get_bytes(in, magic, 4, file.string() + " magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error(file.string() + ": bad magic, expected \"CHDS\"");
    }
    const auto version = binio::get_le<std::uint16_t>(in, "version");
    if (version != kVersion) {
        throw std::runtime_error(file.string() + ": unsupported version " +
                                 std::to_string(version));
    }
    const auto window_len = binio::get_le<std::uint32_t>(in, "window length");
    const auto count = binio::get_le<std::uint64_t>(in, "record count");
    std::vector<LabeledWindow> records(count);
    for (LabeledWindow& rec : records) {
        rec.label = binio::get_le<std::uint8_t>(in, "record label");
        if (rec.label > 1) {
            throw std::runtime_error(file.string() + ": label byte " +
                                     std::to_string(rec.label) + " outside {0,1}");
        }
        rec.window.resize(window_len);
        binio::get_f32_block(in, rec.window.data(), window_len, "record window");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error(file.string() + ": trailing bytes after last record");
    }
    return records;
}

namespace {

nlohmann::json meta_to_json(const DatasetMeta& meta) {
    return nlohmann::json{
        {"ebn0_db", meta.ebn0_db},
        {"snr_db", meta.snr_db},
        {"seed", meta.seed},
        {"mod",
         {{"r_space", meta.mod.r_space},
          {"r_mark", meta.mod.r_mark},
          {"samples_per_bit", meta.mod.samples_per_bit},
          {"sample_rate", meta.mod.sample_rate}}},
    };
}

DatasetMeta meta_from_json(const nlohmann::json& j) {
    DatasetMeta meta;
    meta.ebn0_db = j.at("ebn0_db").get<double>();
    meta.snr_db = j.at("snr_db").get<double>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    const auto& m = j.at("mod");
    meta.mod.r_space = m.at("r_space").get<double>();
    meta.mod.r_mark = m.at("r_mark").get<double>();
    meta.mod.samples_per_bit = m.at("samples_per_bit").get<std::size_t>();
    meta.mod.sample_rate = m.at("sample_rate").get<double>();
    return meta;
}

} // namespace

void save_dataset(const DatasetSplit& d, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_split_file(d.train, dir / "train.chds");
    save_split_file(d.val, dir / "val.chds");
    save_split_file(d.test, dir / "test.chds");
    std::ofstream meta(dir / "meta.json");
    if (!meta) {
        throw std::runtime_error("cannot open " + (dir / "meta.json").string());
    }
    meta << meta_to_json(d.meta).dump(2) << '\n';
}

DatasetSplit load_dataset(const std::filesystem::path& dir) {
    DatasetSplit d;
    d.train = load_split_file(dir / "train.chds");
    d.val = load_split_file(dir / "val.chds");
    d.test = load_split_file(dir / "test.chds");
    std::ifstream meta(dir / "meta.json");
    if (!meta) {
        throw std::runtime_error("cannot open " + (dir / "meta.json").string());
    }
    nlohmann::json j;
    meta >> j;
    d.meta = meta_from_json(j);
    return d;
}

std::array<float, 2> one_hot(std::uint8_t label) {
    if (label == 0) return {1.0f, 0.0f};
    if (label == 1) return {0.0f, 1.0f};
    throw std::invalid_argument("one_hot: label " +
                                std::to_string(static_cast<int>(label)) +
                                " outside {0,1}");
}

} // namespace bpk
