#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ae1svm/data.hpp"
#include "ae1svm/errors.hpp"
#include "ae1svm/model.hpp"
#include "ae1svm/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ae1svm;
namespace fs = std::filesystem;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = 0.0,
                     double hi = 1.0) {
    std::mt19937_64 rng = seeded_rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols);
    for (double& v : m.flat()) v = dist(rng);
    return m;
}

Ae1SvmModel tiny_model(double alpha, std::uint64_t seed = 3) {
    Ae1SvmModel::Config cfg;
    cfg.input_dim = 6;
    cfg.encoder_dims = {4, 2};
    cfg.rff_dim = 3;
    cfg.sigma = 1.5;
    cfg.nu = 0.4;
    cfg.alpha = alpha;
    return Ae1SvmModel(cfg, seed);
}

std::vector<double> snapshot_params(const Ae1SvmModel& m) {
    std::vector<double> all;
    for (const auto* net : {&m.encoder(), &m.decoder()}) {
        for (const DenseLayer& l : net->layers()) {
            all.insert(all.end(), l.weights.flat().begin(), l.weights.flat().end());
            all.insert(all.end(), l.biases.begin(), l.biases.end());
        }
    }
    all.insert(all.end(), m.head().w.begin(), m.head().w.end());
    all.push_back(m.head().rho);
    return all;
}

fs::path temp_path(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ae1svm_model_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("joint_objective with alpha 0 equals the SVM objective on the encoded batch") {
    Ae1SvmModel model = tiny_model(0.0);
    model.head().w = Vector{0.1, -0.2, 0.3, 0.05, -0.15, 0.2};
    model.head().rho = 0.3;
    const Matrix batch = random_matrix(8, 6, 4);
    const Matrix z = model.rff().map_batch(model.encode(batch));
    CHECK(model.joint_objective(batch) ==
          doctest::Approx(svm_objective(model.head(), z)).epsilon(1e-15));
}

TEST_CASE("joint_objective with zero head equals alpha times the reconstruction loss") {
    Ae1SvmModel model = tiny_model(7.5);
    const Matrix batch = random_matrix(5, 6, 5);
    const Matrix latent = model.encode(batch);
    const Matrix rec = model.decoder().forward(latent);
    CHECK(model.joint_objective(batch) ==
          doctest::Approx(7.5 * reconstruction_loss(batch, rec)).epsilon(1e-15));
}

TEST_CASE("joint_objective equals the sum of independently computed parts") {
    Ae1SvmModel model = tiny_model(42.0, 9);
    model.head().w = Vector{0.4, -0.1, 0.2, -0.3, 0.25, 0.15};
    model.head().rho = -0.2;
    const Matrix batch = random_matrix(7, 6, 10);

    const Matrix x = model.preprocess(batch);
    const Matrix latent = model.encoder().forward(x);
    const Matrix rec = model.decoder().forward(latent);
    const Matrix z = model.rff().map_batch(latent);
    const double expected = 42.0 * reconstruction_loss(x, rec) + svm_objective(model.head(), z);
    CHECK(model.joint_objective(batch) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fit with zero epochs changes nothing but fits the scaler") {
    Ae1SvmModel model = tiny_model(1.0);
    const std::vector<double> before = snapshot_params(model);

    LabeledDataset data;
    data.features = random_matrix(20, 6, 11);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.batch_size = 5;
    cfg.seed = 1;
    const TrainReport report = model.fit(data, cfg);

    CHECK(report.epoch_objectives.empty());
    CHECK(report.n_train == 20);
    CHECK(snapshot_params(model) == before);
    CHECK(model.scaler().fitted());
}

TEST_CASE("fit is deterministic per seed") {
    LabeledDataset data;
    data.features = random_matrix(30, 6, 12);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.01;
    cfg.seed = 5;

    Ae1SvmModel a = tiny_model(10.0, 6);
    Ae1SvmModel b = tiny_model(10.0, 6);
    const TrainReport ra = a.fit(data, cfg);
    const TrainReport rb = b.fit(data, cfg);
    CHECK(ra.epoch_objectives == rb.epoch_objectives);
    CHECK(snapshot_params(a) == snapshot_params(b));
}

TEST_CASE("fit validates batch size and learning rate") {
    Ae1SvmModel model = tiny_model(1.0);
    LabeledDataset data;
    data.features = random_matrix(10, 6, 13);

    TrainConfig cfg;
    cfg.batch_size = 11;
    CHECK_THROWS_AS(model.fit(data, cfg), ArgumentError);

    cfg.batch_size = 4;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(model.fit(data, cfg), ArgumentError);
}

TEST_CASE("fit aborts on a non-finite objective naming the epoch and batch") {
    Ae1SvmModel model = tiny_model(1.0);
    model.encoder().layers()[0].weights(0, 0) = std::numeric_limits<double>::quiet_NaN();
    LabeledDataset data;
    data.features = random_matrix(10, 6, 14);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 5;
    try {
        model.fit(data, cfg);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("epoch 0") != std::string::npos);
        CHECK(msg.find("batch 0") != std::string::npos);
    }
}

TEST_CASE("joint fit on the high-dimensional Gaussian dataset lowers the objective") {
    // encoder {128, 32}, nu 0.40, alpha 1000, D = 500, batch 32, lr 0.01
    const LabeledDataset full = gen_gaussian(1);
    const auto [train, test] = split(full, 0.5, 1);

    Ae1SvmModel::Config mc;
    mc.input_dim = 512;
    mc.encoder_dims = {128, 32};
    mc.rff_dim = 500;
    mc.sigma = 3.0;
    mc.nu = 0.40;
    mc.alpha = 1000.0;
    Ae1SvmModel model(mc, 1);

    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.01;
    cfg.seed = 1;
    const TrainReport report = model.fit(train, cfg);

    REQUIRE(report.epoch_objectives.size() == 10);
    CHECK(report.epoch_objectives.back() < report.epoch_objectives.front());

    // nu bounds the fraction of training samples scored as anomalies
    const Vector margins = model.score(train.features);
    std::size_t negative = 0;
    for (double m : margins) {
        if (m < 0.0) ++negative;
    }
    CHECK(static_cast<double>(negative) / static_cast<double>(margins.size()) <= 0.40 + 0.1);
}

TEST_CASE("score is row-wise: duplicates identical, order irrelevant, sign = decision") {
    Ae1SvmModel model = tiny_model(5.0, 20);
    LabeledDataset data;
    data.features = random_matrix(24, 6, 21);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 6;
    cfg.learning_rate = 0.02;
    cfg.seed = 2;
    model.fit(data, cfg);

    Matrix doubled(2, 6);
    for (std::size_t j = 0; j < 6; ++j) {
        doubled(0, j) = data.features(0, j);
        doubled(1, j) = data.features(0, j);
    }
    const Vector dup_scores = model.score(doubled);
    CHECK(dup_scores[0] == dup_scores[1]);

    const Vector forward_scores = model.score(data.features);
    Matrix reversed(data.rows(), 6);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            reversed(i, j) = data.features(data.rows() - 1 - i, j);
        }
    }
    const Vector reversed_scores = model.score(reversed);
    for (std::size_t i = 0; i < forward_scores.size(); ++i) {
        CHECK(forward_scores[i] == reversed_scores[forward_scores.size() - 1 - i]);
    }

    for (std::size_t i = 0; i < forward_scores.size(); ++i) {
        const Vector z = model.rff().map(model.encode(data.features).row(i));
        CHECK((forward_scores[i] >= 0.0) == (decide(model.head(), z) == 1));
    }
}

TEST_CASE("every parameter gradient of the joint objective matches finite differences") {
    Ae1SvmModel model = tiny_model(3.0, 30);
    // move the head off the all-at-the-kink initial state
    std::mt19937_64 rng = seeded_rng(31);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (double& v : model.head().w) v = dist(rng);
    model.head().rho = 0.37;

    Matrix batch = random_matrix(4, 6, 32);
    auto objective = [&]() { return model.joint_objective(batch); };

    // stay away from hinge kinks so central differences are valid
    const Matrix z0 = model.rff().map_batch(model.encode(batch));
    for (std::size_t i = 0; i < z0.rows(); ++i) {
        REQUIRE(std::abs(model.head().rho - dot(model.head().w, z0.row(i))) > 1e-3);
    }

    // gradients via the training path: reuse the internals fit() uses
    const Matrix x = model.preprocess(batch);
    ForwardCache enc_cache, dec_cache;
    const Matrix latent = model.encoder().forward(x, &enc_cache);
    const Matrix x_rec = model.decoder().forward(latent, &dec_cache);
    Matrix rec_grad = reconstruction_loss_grad(x, x_rec);
    for (double& g : rec_grad.flat()) g *= model.alpha();
    const BackwardResult dec_back = model.decoder().backward(dec_cache, rec_grad);
    const Matrix z = model.rff().map_batch(latent);
    const SvmParamGrads head_grads = svm_param_grads(model.head(), z);
    const Matrix z_grad = svm_feature_grads(model.head(), z);

    // latent grad = decoder path + RFF path, then back through the encoder
    Matrix latent_grad = dec_back.input_grad;
    {
        const std::size_t d_freq = model.rff().num_frequencies();
        const double scale = std::sqrt(1.0 / static_cast<double>(d_freq));
        Matrix coeffs(latent.rows(), d_freq);
        for (std::size_t i = 0; i < latent.rows(); ++i) {
            for (std::size_t j = 0; j < d_freq; ++j) {
                coeffs(i, j) = scale * (-z_grad(i, j) * (z(i, d_freq + j) / scale) +
                                        z_grad(i, d_freq + j) * (z(i, j) / scale));
            }
        }
        const Matrix svm_latent = matmul(coeffs, model.rff().omegas());
        for (std::size_t i = 0; i < latent_grad.size(); ++i) {
            latent_grad.flat()[i] += svm_latent.flat()[i];
        }
    }
    const BackwardResult enc_back = model.encoder().backward(enc_cache, latent_grad);

    auto check_network = [&](DenseNetwork& net, const NetworkGrads& grads) {
        for (std::size_t li = 0; li < net.layers().size(); ++li) {
            auto weights = net.layers()[li].weights.flat();
            for (std::size_t i = 0; i < weights.size(); ++i) {
                const double numeric = oracles::central_diff(objective, weights[i]);
                CHECK(oracles::grad_close(grads.layers[li].weights.flat()[i], numeric));
            }
            for (std::size_t i = 0; i < net.layers()[li].biases.size(); ++i) {
                const double numeric = oracles::central_diff(objective, net.layers()[li].biases[i]);
                CHECK(oracles::grad_close(grads.layers[li].biases[i], numeric));
            }
        }
    };
    check_network(model.encoder(), enc_back.param_grads);
    check_network(model.decoder(), dec_back.param_grads);
    for (std::size_t j = 0; j < model.head().w.size(); ++j) {
        const double numeric = oracles::central_diff(objective, model.head().w[j]);
        CHECK(oracles::grad_close(head_grads.grad_w[j], numeric));
    }
    const double numeric_rho = oracles::central_diff(objective, model.head().rho);
    CHECK(oracles::grad_close(head_grads.grad_rho, numeric_rho));
}

TEST_CASE("a huge alpha yields reconstruction at least as good as alpha 0") {
    LabeledDataset data;
    data.features = random_matrix(40, 6, 40);
    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.batch_size = 10;
    cfg.learning_rate = 0.02;
    cfg.seed = 7;

    auto trained_reconstruction = [&](double alpha) {
        Ae1SvmModel model = tiny_model(alpha, 41);
        model.fit(data, cfg);
        const Matrix x = model.preprocess(data.features);
        const Matrix rec = model.decoder().forward(model.encoder().forward(x));
        return reconstruction_loss(x, rec);
    };
    CHECK(trained_reconstruction(1e6) <= trained_reconstruction(0.0));
}

TEST_CASE("two-stage phase 1 equals a joint step while the head is all zero") {
    // with w = 0 and rho = 0 the SVM term sends no gradient into the
    // encoder, so one full-batch epoch must coincide with phase 1
    LabeledDataset data;
    data.features = random_matrix(16, 6, 50);
    TrainConfig joint_cfg;
    joint_cfg.epochs = 1;
    joint_cfg.batch_size = 16;
    joint_cfg.learning_rate = 0.01;
    joint_cfg.seed = 3;
    joint_cfg.mode = TrainMode::Joint;

    TrainConfig two_stage_cfg = joint_cfg;
    two_stage_cfg.mode = TrainMode::TwoStage;

    Ae1SvmModel joint = tiny_model(1.0, 51);
    Ae1SvmModel two_stage = tiny_model(1.0, 51);
    joint.fit(data, joint_cfg);
    two_stage.fit(data, two_stage_cfg);

    for (std::size_t li = 0; li < joint.encoder().layers().size(); ++li) {
        CHECK(joint.encoder().layers()[li].weights == two_stage.encoder().layers()[li].weights);
        CHECK(joint.encoder().layers()[li].biases == two_stage.encoder().layers()[li].biases);
    }
}

TEST_CASE("two-stage reports one objective per epoch per phase") {
    LabeledDataset data;
    data.features = random_matrix(20, 6, 60);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 5;
    cfg.learning_rate = 0.01;
    cfg.seed = 4;
    cfg.mode = TrainMode::TwoStage;

    Ae1SvmModel model = tiny_model(1.0, 61);
    const TrainReport report = model.fit(data, cfg);
    CHECK(report.epoch_objectives.size() == 6);  // 3 autoencoder + 3 SVM
}

TEST_CASE("save then load reproduces scores exactly") {
    Ae1SvmModel model = tiny_model(2.0, 70);
    LabeledDataset data;
    data.features = random_matrix(25, 6, 71);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 5;
    cfg.learning_rate = 0.01;
    cfg.seed = 9;
    model.fit(data, cfg);

    const fs::path path = temp_path("model.bin");
    model.save(path);
    const Ae1SvmModel loaded = Ae1SvmModel::load(path);

    const Vector original = model.score(data.features);
    const Vector reloaded = loaded.score(data.features);
    CHECK(original == reloaded);
    CHECK(loaded.alpha() == model.alpha());
    CHECK(loaded.head().nu == model.head().nu);
}

TEST_CASE("load rejects files that are not models") {
    const fs::path path = temp_path("not_a_model.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out << "definitely not a model";
    }
    CHECK_THROWS_AS(Ae1SvmModel::load(path), DataError);
    CHECK_THROWS_AS(Ae1SvmModel::load(temp_path("missing.bin")), DataError);
}

}  // TEST_SUITE
