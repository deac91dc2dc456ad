#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ae1svm/attribution.hpp"
#include "ae1svm/errors.hpp"
#include "ae1svm/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ae1svm;
namespace fs = std::filesystem;

namespace {

// Small model with an Identity encoder so the chain collapses.
Ae1SvmModel identity_model(std::size_t dim, std::uint64_t seed) {
    Ae1SvmModel::Config cfg;
    cfg.input_dim = dim;
    cfg.encoder_dims = {dim};
    cfg.rff_dim = 5;
    cfg.sigma = 2.0;
    cfg.nu = 0.5;
    cfg.alpha = 1.0;
    Ae1SvmModel model(cfg, seed);
    for (auto* net : {&model.encoder(), &model.decoder()}) {
        net->layers()[0].activation = Activation::Identity;
        net->layers()[0].weights = Matrix::identity(dim);
        net->layers()[0].biases.assign(dim, 0.0);
    }
    std::mt19937_64 rng = seeded_rng(seed + 1);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : model.head().w) v = dist(rng);
    model.head().rho = 0.1;
    return model;
}

Ae1SvmModel sigmoid_model(std::uint64_t seed) {
    Ae1SvmModel::Config cfg;
    cfg.input_dim = 5;
    cfg.encoder_dims = {4, 3};
    cfg.rff_dim = 6;
    cfg.sigma = 1.5;
    cfg.nu = 0.4;
    cfg.alpha = 2.0;
    Ae1SvmModel model(cfg, seed);
    std::mt19937_64 rng = seeded_rng(seed + 1);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : model.head().w) v = dist(rng);
    model.head().rho = -0.2;
    // non-trivial column scaling so its jacobian is exercised
    model.scaler().offsets = {0.0, -1.0, 2.0, 0.5, -3.0};
    model.scaler().scales = {2.0, 4.0, 1.0, 0.25, 6.0};
    return model;
}

}  // namespace

TEST_SUITE("attribution") {

TEST_CASE("layer_grad of a sigmoid layer at u = 0.5 is 0.25 * w") {
    DenseLayer layer(3, 2, Activation::Sigmoid, 1);
    layer.biases.assign(2, 0.0);
    const Vector zero_input(3, 0.0);  // pre-activation 0 -> u = 0.5
    const Matrix jac = layer_grad(layer, zero_input);
    REQUIRE(jac.rows() == 2);
    REQUIRE(jac.cols() == 3);
    for (std::size_t n = 0; n < 2; ++n) {
        for (std::size_t m = 0; m < 3; ++m) {
            CHECK(jac(n, m) == doctest::Approx(0.25 * layer.weights(m, n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("layer_grad of a tanh layer at u = 0 is w itself") {
    DenseLayer layer(4, 3, Activation::Tanh, 2);
    layer.biases.assign(3, 0.0);
    const Matrix jac = layer_grad(layer, Vector(4, 0.0));  // u = tanh(0) = 0
    for (std::size_t n = 0; n < 3; ++n) {
        for (std::size_t m = 0; m < 4; ++m) {
            CHECK(jac(n, m) == doctest::Approx(layer.weights(m, n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("layer_grad matches finite differences of the layer forward") {
    for (Activation act : {Activation::Sigmoid, Activation::Tanh, Activation::Identity}) {
        DenseLayer layer(4, 3, act, 5);
        std::mt19937_64 rng = seeded_rng(6);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        Vector input(4);
        for (double& v : input) v = dist(rng);

        const Matrix jac = layer_grad(layer, input);
        for (std::size_t n = 0; n < 3; ++n) {
            auto output_n = [&]() {
                double pre = layer.biases[n];
                for (std::size_t m = 0; m < 4; ++m) pre += input[m] * layer.weights(m, n);
                return activate(layer.activation, pre);
            };
            for (std::size_t m = 0; m < 4; ++m) {
                const double numeric = oracles::central_diff(output_n, input[m]);
                CHECK(oracles::grad_close(jac(n, m), numeric));
            }
        }
    }
    CHECK_THROWS_AS(layer_grad(DenseLayer(3, 2, Activation::Tanh, 1), Vector(4, 0.0)),
                    ArgumentError);
}

TEST_CASE("end_to_end_grad through an identity encoder is the RFF margin gradient") {
    const Ae1SvmModel model = identity_model(4, 7);
    const Vector x = {0.3, -0.7, 0.2, 0.9};
    const AttributionResult result = end_to_end_grad(model, x);
    const Vector direct = margin_input_grad(model.head(), model.rff(), x);
    REQUIRE(result.gradient.size() == direct.size());
    for (std::size_t k = 0; k < direct.size(); ++k) {
        CHECK(result.gradient[k] == doctest::Approx(direct[k]).epsilon(1e-12));
    }
}

TEST_CASE("end_to_end_grad matches finite differences of the scoring path") {
    const Ae1SvmModel model = sigmoid_model(8);
    Vector raw = {1.1, 0.5, 2.4, 0.6, -1.0};
    const AttributionResult result = end_to_end_grad(model, raw);

    auto margin_of_raw = [&]() {
        Matrix one(1, raw.size());
        std::copy(raw.begin(), raw.end(), one.row(0).begin());
        return model.score(one)[0];
    };
    for (std::size_t k = 0; k < raw.size(); ++k) {
        const double numeric = oracles::central_diff(margin_of_raw, raw[k]);
        CHECK(oracles::grad_close(result.gradient[k], numeric));
    }
}

TEST_CASE("end_to_end_grad equals the explicit jacobian-product route to 1e-10") {
    const Ae1SvmModel model = sigmoid_model(9);
    const Vector raw = {0.2, 1.5, 2.9, 0.55, 2.0};
    const AttributionResult result = end_to_end_grad(model, raw);

    // second route: explicit per-layer jacobians multiplied together
    Vector scaled = model.scaler().transform_row(raw);
    Matrix total = Matrix::identity(scaled.size());
    Vector current = scaled;
    for (const DenseLayer& layer : model.encoder().layers()) {
        const Matrix jac = layer_grad(layer, current);
        total = oracles::naive_matmul(jac, total);
        Matrix one(1, current.size());
        std::copy(current.begin(), current.end(), one.row(0).begin());
        DenseNetwork single;
        single.layers().push_back(layer);
        current = Vector(layer.fan_out());
        const Matrix out = single.forward(one);
        std::copy(out.row(0).begin(), out.row(0).end(), current.begin());
    }
    const Vector latent_grad = margin_input_grad(model.head(), model.rff(), current);
    for (std::size_t k = 0; k < raw.size(); ++k) {
        double g = 0.0;
        for (std::size_t l = 0; l < latent_grad.size(); ++l) g += latent_grad[l] * total(l, k);
        g *= model.scaler().input_jacobian(k);
        CHECK(std::abs(result.gradient[k] - g) <= 1e-10);
    }
}

TEST_CASE("positive and negative parts reconstruct the signed gradient") {
    const Ae1SvmModel model = sigmoid_model(10);
    const AttributionResult result = end_to_end_grad(model, Vector{0.5, 0.0, 2.5, 0.6, 0.0});
    for (std::size_t k = 0; k < result.gradient.size(); ++k) {
        CHECK(result.positive_part[k] >= 0.0);
        CHECK(result.negative_part[k] >= 0.0);
        CHECK(result.gradient[k] ==
              doctest::Approx(result.positive_part[k] - result.negative_part[k]).epsilon(1e-15));
    }
}

TEST_CASE("gradient_map splits and reshapes") {
    AttributionResult result;
    result.gradient = {1.0, -2.0, 0.0, 3.0};
    result.positive_part = {1.0, 0.0, 0.0, 3.0};
    result.negative_part = {0.0, 2.0, 0.0, 0.0};

    const GradientMaps maps = gradient_map(result, 2, 2);
    CHECK(maps.positive(0, 0) == 1.0);
    CHECK(maps.positive(0, 1) == 0.0);
    CHECK(maps.positive(1, 0) == 0.0);
    CHECK(maps.positive(1, 1) == 3.0);
    CHECK(maps.negative(0, 0) == 0.0);
    CHECK(maps.negative(0, 1) == 2.0);
    CHECK(maps.negative(1, 0) == 0.0);
    CHECK(maps.negative(1, 1) == 0.0);
    CHECK(maps.full(0, 1) == 2.0);

    // reshape then flatten recovers the |gradient| vector
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(maps.full(i / 2, i % 2) == std::abs(result.gradient[i]));
    }

    CHECK_THROWS_AS(gradient_map(result, 3, 2), ArgumentError);
}

TEST_CASE("gradient_map of a zero gradient is three zero grids") {
    AttributionResult result;
    result.gradient.assign(6, 0.0);
    result.positive_part.assign(6, 0.0);
    result.negative_part.assign(6, 0.0);
    const GradientMaps maps = gradient_map(result, 2, 3);
    for (double v : maps.positive.flat()) CHECK(v == 0.0);
    for (double v : maps.negative.flat()) CHECK(v == 0.0);
    for (double v : maps.full.flat()) CHECK(v == 0.0);
}

TEST_CASE("write_pgm emits an 8-bit binary grid scaled to 0..255") {
    Matrix grid(2, 3);
    grid(0, 0) = 0.0;
    grid(0, 1) = 0.5;
    grid(0, 2) = 1.0;
    grid(1, 0) = 0.25;
    grid(1, 1) = 0.75;
    grid(1, 2) = 1.0;

    const fs::path dir = fs::temp_directory_path() / "ae1svm_attr_tests";
    fs::create_directories(dir);
    const fs::path path = dir / "map.pgm";
    write_pgm(grid, path);

    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string header = "P5\n3 2\n255\n";
    REQUIRE(content.size() == header.size() + 6);
    CHECK(content.substr(0, header.size()) == header);
    const auto* pixels = reinterpret_cast<const unsigned char*>(content.data() + header.size());
    CHECK(pixels[0] == 0);
    CHECK(pixels[1] == 128);  // 0.5 scaled
    CHECK(pixels[2] == 255);
    CHECK(pixels[5] == 255);
}

}  // TEST_SUITE
