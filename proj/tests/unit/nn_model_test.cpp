#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "bpk/nn/model.hpp"

using namespace bpk::nn;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_cfg() {
    ModelConfig cfg;
    cfg.input_len = 8;
    cfg.conv_filters = 2;
    cfg.conv_kernel = 3;
    cfg.dense_units = 4;
    cfg.classes = 2;
    return cfg;
}

fs::path temp_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / "bpk_model_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE("nn_model") {

TEST_CASE("default configuration reproduces the reference parameter counts") {
    const auto pc = parameter_counts(ModelConfig{});
    REQUIRE(pc.layers.size() == 8);
    CHECK(pc.layers[0].params == 0);        // reshape
    CHECK(pc.layers[1].params == 4);        // input batchnorm
    CHECK(pc.layers[2].params == 2176);     // conv1d
    CHECK(pc.layers[3].params == 512);      // conv batchnorm
    CHECK(pc.layers[4].params == 0);        // flatten
    CHECK(pc.layers[5].params == 33554496); // hidden dense
    CHECK(pc.layers[6].params == 256);      // hidden batchnorm
    CHECK(pc.layers[7].params == 130);      // output dense
    CHECK(pc.total == 33557574);
    CHECK(pc.trainable == 33557188);
    CHECK(pc.non_trainable == 386);
}

TEST_CASE("default configuration reproduces the reference shape chain") {
    const auto pc = parameter_counts(ModelConfig{});
    CHECK(pc.layers[0].output_shape == std::vector<std::size_t>{4096, 1});
    CHECK(pc.layers[1].output_shape == std::vector<std::size_t>{4096, 1});
    CHECK(pc.layers[2].output_shape == std::vector<std::size_t>{4096, 128});
    CHECK(pc.layers[3].output_shape == std::vector<std::size_t>{4096, 128});
    CHECK(pc.layers[4].output_shape == std::vector<std::size_t>{524288});
    CHECK(pc.layers[5].output_shape == std::vector<std::size_t>{64});
    CHECK(pc.layers[6].output_shape == std::vector<std::size_t>{64});
    CHECK(pc.layers[7].output_shape == std::vector<std::size_t>{2});
}

TEST_CASE("parameter-count identities hold for any configuration") {
    for (const auto& cfg : {tiny_cfg(), ModelConfig{}}) {
        const auto pc = parameter_counts(cfg);
        CHECK(pc.layers[2].params ==
              cfg.conv_kernel * cfg.conv_filters + cfg.conv_filters);
        CHECK(pc.layers[5].params ==
              cfg.flat_len() * cfg.dense_units + cfg.dense_units);
        const auto model = build_model<float>(cfg, 7);
        std::size_t actual = 0;
        for (const auto* t : model.all_tensors()) actual += t->size();
        CHECK(actual == pc.total);
    }
}

TEST_CASE("config validation rejects degenerate dimensions") {
    ModelConfig cfg = tiny_cfg();
    cfg.conv_filters = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_cfg();
    cfg.conv_kernel = 100; // longer than input
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_cfg();
    cfg.classes = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("format_summary carries the totals") {
    const auto text = format_summary(parameter_counts(ModelConfig{}));
    CHECK(text.find("33557574") != std::string::npos);
    CHECK(text.find("33557188") != std::string::npos);
    CHECK(text.find("386") != std::string::npos);
}

TEST_CASE("predict yields a probability vector") {
    const auto model = build_model<double>(tiny_cfg(), 3);
    std::vector<double> window{0.1, 0.9, 0.4, 0.6, 0.2, 0.8, 0.3, 0.7};
    const auto p = predict(model, window);
    REQUIRE(p.size() == 2);
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p[0] >= 0.0);
    CHECK(p[1] >= 0.0);
}

TEST_CASE("a fresh model maps the zero window to (0.5, 0.5)") {
    const auto model = build_model<double>(tiny_cfg(), 12345);
    const std::vector<double> zeros(8, 0.0);
    const auto p = predict(model, zeros);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("predict rejects a wrong window length") {
    const auto model = build_model<float>(tiny_cfg(), 3);
    CHECK_THROWS_AS(predict(model, std::vector<float>(9, 0.0f)),
                    std::invalid_argument);
}

TEST_CASE("initialization is seeded and reproducible") {
    const auto a = build_model<float>(tiny_cfg(), 11);
    const auto b = build_model<float>(tiny_cfg(), 11);
    const auto c = build_model<float>(tiny_cfg(), 12);
    CHECK(a.conv.w.data == b.conv.w.data);
    CHECK(a.dense_hidden.w.data == b.dense_hidden.w.data);
    CHECK(a.conv.w.data != c.conv.w.data);
    // gamma one, beta zero, moving stats identity
    CHECK(a.bn_conv.gamma[0] == 1.0f);
    CHECK(a.bn_conv.beta[0] == 0.0f);
    CHECK(a.bn_conv.moving_mean[0] == 0.0f);
    CHECK(a.bn_conv.moving_var[0] == 1.0f);
}

TEST_CASE("weight save/load roundtrip is bitwise") {
    const auto dir = temp_dir("roundtrip");
    auto model = build_model<float>(tiny_cfg(), 5);
    model.bn_conv.moving_mean[0] = 0.123f; // moving stats must survive
    save_weights(model, dir / "w.chnn");
    const auto loaded = load_weights(dir / "w.chnn");
    CHECK(loaded.cfg == model.cfg);
    const auto src = model.all_tensors();
    const auto dst = loaded.all_tensors();
    for (std::size_t i = 0; i < src.size(); ++i) {
        CHECK(src[i]->data == dst[i]->data);
    }
}

TEST_CASE("weight file size matches the parameter payload") {
    const auto dir = temp_dir("payload");
    const auto cfg = tiny_cfg();
    save_weights(build_model<float>(cfg, 5), dir / "w.chnn");
    // header: magic 4 + version 2 + fingerprint 8 + 5 u64 + 2 f64 = 70
    const auto pc = parameter_counts(cfg);
    CHECK(fs::file_size(dir / "w.chnn") == 70 + 4 * pc.total);
}

TEST_CASE("loading into a mismatched config names both fingerprints") {
    const auto dir = temp_dir("mismatch");
    const auto cfg = tiny_cfg();
    save_weights(build_model<float>(cfg, 5), dir / "w.chnn");
    ModelConfig other = cfg;
    other.dense_units = 8;
    try {
        load_weights(dir / "w.chnn", other);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find(std::to_string(cfg.fingerprint())) != std::string::npos);
        CHECK(msg.find(std::to_string(other.fingerprint())) != std::string::npos);
    }
}

TEST_CASE("load rejects truncated or padded weight files") {
    const auto dir = temp_dir("trunc");
    save_weights(build_model<float>(tiny_cfg(), 5), dir / "w.chnn");
    std::ifstream in(dir / "w.chnn", std::ios::binary);
    std::string bytes(std::istreambuf_iterator<char>(in), {});
    std::ofstream(dir / "cut.chnn", std::ios::binary)
        << bytes.substr(0, bytes.size() - 3);
    CHECK_THROWS_AS(load_weights(dir / "cut.chnn"), std::runtime_error);
    std::ofstream(dir / "pad.chnn", std::ios::binary) << bytes << "xy";
    CHECK_THROWS_AS(load_weights(dir / "pad.chnn"), std::runtime_error);
    std::ofstream(dir / "bad.chnn", std::ios::binary)
        << "XXXX" << bytes.substr(4);
    try {
        load_weights(dir / "bad.chnn");
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("CHNN") != std::string::npos);
    }
}

TEST_CASE("zero conv-batchnorm gamma blocks gradients into the conv layer") {
    auto model = build_model<double>(tiny_cfg(), 9);
    model.bn_conv.gamma.fill(0.0);
    // keep the downstream path alive so the batchnorm's own shift learns
    model.bn_conv.beta.fill(0.1);
    const std::size_t batch = 3;
    std::vector<double> x(batch * 8);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.05 * (i % 17) + 0.1;
    std::vector<double> y(batch * 2, 0.0);
    for (std::size_t b = 0; b < batch; ++b) y[b * 2 + b % 2] = 1.0;
    auto grads = Gradients<double>::like(model);
    TrainWorkspace<double> ws;
    forward_backward(model, x.data(), batch, y.data(), grads, ws);
    for (double g : grads.tensors[2].data) CHECK(g == 0.0); // conv w
    for (double g : grads.tensors[3].data) CHECK(g == 0.0); // conv b
    for (double g : grads.tensors[0].data) CHECK(g == 0.0); // input bn gamma
    // the conv batchnorm's own beta still learns
    bool nonzero = false;
    for (double g : grads.tensors[5].data) nonzero = nonzero || g != 0.0;
    CHECK(nonzero);
}

TEST_CASE("a duplicated sample leaves the mean-loss gradient unchanged") {
    auto model = build_model<double>(tiny_cfg(), 21);
    std::vector<double> x1{0.1, 0.8, 0.33, 0.6, 0.25, 0.9, 0.47, 0.05};
    std::vector<double> y1{1.0, 0.0};
    std::vector<double> x2(16), y2(4);
    std::copy(x1.begin(), x1.end(), x2.begin());
    std::copy(x1.begin(), x1.end(), x2.begin() + 8);
    std::copy(y1.begin(), y1.end(), y2.begin());
    std::copy(y1.begin(), y1.end(), y2.begin() + 2);

    auto model_a = model;
    auto model_b = model;
    auto ga = Gradients<double>::like(model);
    auto gb = Gradients<double>::like(model);
    TrainWorkspace<double> wa, wb;
    const double la = forward_backward(model_a, x1.data(), 1, y1.data(), ga, wa);
    const double lb = forward_backward(model_b, x2.data(), 2, y2.data(), gb, wb);
    CHECK(la == doctest::Approx(lb).epsilon(1e-12));
    for (std::size_t t = 0; t < ga.tensors.size(); ++t) {
        for (std::size_t i = 0; i < ga.tensors[t].size(); ++i) {
            CHECK(ga.tensors[t][i] ==
                  doctest::Approx(gb.tensors[t][i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward_backward rejects an empty batch") {
    auto model = build_model<float>(tiny_cfg(), 3);
    auto grads = Gradients<float>::like(model);
    TrainWorkspace<float> ws;
    const float* no_data = nullptr;
    CHECK_THROWS_AS(forward_backward(model, no_data, 0, no_data, grads, ws),
                    std::invalid_argument);
}

} // TEST_SUITE
