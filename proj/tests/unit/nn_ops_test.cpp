#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bpk/nn/adam.hpp"
#include "bpk/nn/ops.hpp"

using namespace bpk::nn;

TEST_SUITE("nn_ops") {

TEST_CASE("conv1d with a unit kernel is the identity") {
    Tensor<double> x({5}, {0.1, 0.2, 0.3, 0.4, 0.5});
    Tensor<double> w({1, 1, 1}, {1.0});
    Tensor<double> b({1}, {0.0});
    const auto y = conv1d_forward(x, w, b);
    REQUIRE(y.shape == std::vector<std::size_t>{5, 1});
    for (std::size_t i = 0; i < 5; ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("conv1d hand example with zero padding") {
    Tensor<double> x({4}, {1, 2, 3, 4});
    Tensor<double> w({3, 1, 1}, {1, 1, 1});
    Tensor<double> b({1}, {0.0});
    const auto y = conv1d_forward(x, w, b);
    CHECK(y[0] == 3);
    CHECK(y[1] == 6);
    CHECK(y[2] == 9);
    CHECK(y[3] == 7);
}

TEST_CASE("conv1d bias and multi-filter shapes") {
    Tensor<double> x({4, 1}, {1, 2, 3, 4});
    Tensor<double> w({1, 1, 2}, {2.0, -1.0});
    Tensor<double> b({2}, {10.0, 0.5});
    const auto y = conv1d_forward(x, w, b);
    REQUIRE(y.shape == std::vector<std::size_t>{4, 2});
    CHECK(y[0] == 12.0);  // 10 + 2*1
    CHECK(y[1] == -0.5);  // 0.5 - 1
}

TEST_CASE("conv1d default-config output shape") {
    Tensor<float> x({4096, 1});
    Tensor<float> w({16, 1, 128});
    Tensor<float> b({128});
    const auto y = conv1d_forward(x, w, b);
    CHECK(y.shape == std::vector<std::size_t>{4096, 128});
}

TEST_CASE("conv1d rejects malformed shapes") {
    Tensor<double> x({4, 2});
    Tensor<double> w({3, 1, 1}, {1, 1, 1});
    Tensor<double> b({1}, {0.0});
    CHECK_THROWS_AS(conv1d_forward(x, w, b), std::invalid_argument);
    Tensor<double> x1({4});
    Tensor<double> bad_b({2});
    CHECK_THROWS_AS(conv1d_forward(x1, w, bad_b), std::invalid_argument);
}

TEST_CASE("batchnorm train mode passes standardized input through") {
    // mean 0, variance 1 by construction
    Tensor<double> x({4, 1}, {-1, 1, -1, 1});
    auto bn = BatchNorm<double>::identity(1, /*epsilon=*/1e-12);
    const auto y = batchnorm_forward(x, Mode::train, bn);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-9));
    }
}

TEST_CASE("batchnorm train mode maps a constant batch to beta") {
    Tensor<double> x({5, 1}, {0.7, 0.7, 0.7, 0.7, 0.7});
    auto bn = BatchNorm<double>::identity(1, 1e-3);
    bn.beta[0] = 2.5;
    const auto y = batchnorm_forward(x, Mode::train, bn);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(y[i] == doctest::Approx(2.5).epsilon(1e-12));
    }
}

TEST_CASE("batchnorm infer mode with identity statistics is the identity") {
    Tensor<double> x({3, 2}, {0.4, -0.1, 2.0, 1.5, -3.0, 0.0});
    auto bn = BatchNorm<double>::identity(2, /*epsilon=*/1e-15);
    const auto y = batchnorm_forward(x, Mode::infer, bn);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-9));
    }
}

TEST_CASE("batchnorm train/infer agree once moving stats converge") {
    // stationary stream: identical batch fed repeatedly, momentum 0.5
    Tensor<float> x({8, 2});
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<float>(0.3 * i - 1.0);
    }
    auto bn = BatchNorm<float>::identity(2, 1e-3, /*momentum=*/0.5);
    bn.gamma[0] = 1.3f;
    bn.beta[1] = -0.4f;
    Tensor<float> train_out;
    for (int step = 0; step < 60; ++step) {
        train_out = batchnorm_forward(x, Mode::train, bn);
    }
    const auto infer_out = batchnorm_forward(x, Mode::infer, bn);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::fabs(train_out[i] - infer_out[i]) < 1e-2);
    }
}

TEST_CASE("batchnorm rejects empty batches and channel mismatches") {
    auto bn = BatchNorm<double>::identity(2);
    Tensor<double> wrong({4, 3});
    CHECK_THROWS_AS(batchnorm_forward(wrong, Mode::train, bn),
                    std::invalid_argument);
}

TEST_CASE("dense with identity weights is the identity") {
    Tensor<double> x({3}, {1.5, -2.0, 0.25});
    Tensor<double> w({3, 3});
    for (std::size_t i = 0; i < 3; ++i) w[i * 3 + i] = 1.0;
    Tensor<double> b({3});
    const auto y = dense_forward(x, w, b);
    CHECK(y.data == x.data);
}

TEST_CASE("dense computes an affine map") {
    Tensor<double> x({2}, {1.0, 2.0});
    Tensor<double> w({2, 2}, {1.0, 2.0, 3.0, 4.0});
    Tensor<double> b({2}, {0.5, -0.5});
    const auto y = dense_forward(x, w, b);
    CHECK(y[0] == doctest::Approx(1 * 1 + 2 * 3 + 0.5));
    CHECK(y[1] == doctest::Approx(1 * 2 + 2 * 4 - 0.5));
    CHECK_THROWS_AS(dense_forward(Tensor<double>({3}), w, b),
                    std::invalid_argument);
}

TEST_CASE("relu clamps negatives") {
    Tensor<double> x({4}, {-2.0, 0.0, 0.5, 3.0});
    const auto y = relu(x);
    CHECK(y.data == std::vector<double>{0.0, 0.0, 0.5, 3.0});
}

TEST_CASE("softmax is symmetric on equal logits") {
    Tensor<double> z({2}, {0.0, 0.0});
    const auto p = softmax(z);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("softmax normalizes and honors ordering") {
    Tensor<double> z({3}, {1.0, 2.0, 3.0});
    const auto p = softmax(z);
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[2] > p[1]);
    CHECK(p[1] > p[0]);
    Tensor<double> inf({2}, {1.0, std::numeric_limits<double>::infinity()});
    CHECK_THROWS_AS(softmax(inf), std::invalid_argument);
}

TEST_CASE("cross entropy of a perfect prediction is zero") {
    Tensor<double> p({2}, {1.0, 0.0});
    Tensor<double> y({2}, {1.0, 0.0});
    CHECK(cross_entropy(p, y) == 0.0);
}

TEST_CASE("cross entropy clamps vanishing probabilities") {
    Tensor<double> p({2}, {0.0, 1.0});
    Tensor<double> y({2}, {1.0, 0.0});
    CHECK(cross_entropy(p, y) == doctest::Approx(-std::log(1e-12)));
    Tensor<double> wrong({3});
    CHECK_THROWS_AS(cross_entropy(p, wrong), std::invalid_argument);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    Tensor<double> p({3}, {1.0, -2.0, 0.5});
    const Tensor<double> p0 = p;
    Tensor<double> g({3});
    Tensor<double> m({3}), v({3});
    adam_update_tensor(p, g, m, v, 1, 1e-3, 0.9, 0.999, 1e-7);
    CHECK(p.data == p0.data);
}

TEST_CASE("adam: first-step magnitude is about lr") {
    Tensor<double> p({1}, {0.0});
    Tensor<double> g({1}, {0.37});
    Tensor<double> m({1}), v({1});
    adam_update_tensor(p, g, m, v, 1, 1e-3, 0.9, 0.999, 1e-7);
    // update = lr * g / (|g| + eps)
    CHECK(std::fabs(p[0] + 1e-3) < 1e-8);
    CHECK(p[0] < 0.0); // opposite the gradient
}

TEST_CASE("adam: identical inputs give identical trajectories") {
    Tensor<double> p1({2}, {0.3, -0.7}), p2 = p1;
    Tensor<double> m1({2}), v1({2}), m2({2}), v2({2});
    for (std::uint64_t t = 1; t <= 50; ++t) {
        Tensor<double> g({2}, {std::sin(0.1 * t), std::cos(0.2 * t)});
        adam_update_tensor(p1, g, m1, v1, t, 1e-2, 0.9, 0.999, 1e-7);
        adam_update_tensor(p2, g, m2, v2, t, 1e-2, 0.9, 0.999, 1e-7);
    }
    CHECK(p1.data == p2.data);
}

TEST_CASE("adam converges on a quadratic") {
    Tensor<double> p({1}, {0.0});
    Tensor<double> m({1}), v({1});
    for (std::uint64_t t = 1; t <= 2000; ++t) {
        Tensor<double> g({1}, {2.0 * (p[0] - 3.0)});
        adam_update_tensor(p, g, m, v, t, 0.1, 0.9, 0.999, 1e-7);
    }
    CHECK(p[0] == doctest::Approx(3.0).epsilon(1e-3));
}

} // TEST_SUITE
