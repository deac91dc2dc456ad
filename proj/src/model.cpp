#include "ae1svm/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include "ae1svm/errors.hpp"
#include "ae1svm/rng.hpp"

namespace ae1svm {

FeatureScaler FeatureScaler::fit(const Matrix& x) {
    if (x.rows() == 0 || x.cols() == 0) throw ArgumentError("FeatureScaler::fit: empty data");
    FeatureScaler s;
    s.offsets.assign(x.cols(), 0.0);
    s.scales.assign(x.cols(), 1.0);
    const double n = static_cast<double>(x.rows());
    // standardize per column, then spread the unit budget across columns
    // so rows have unit expected norm; keeps first-layer pre-activations
    // in the sigmoids' active range and latent distances on a scale the
    // fixed kernel bandwidth can resolve, independent of input width
    const double row_norm = std::sqrt(static_cast<double>(x.cols()));
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) mean += x(r, c);
        mean /= n;
        double var = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double d = x(r, c) - mean;
            var += d * d;
        }
        var /= n;
        s.offsets[c] = mean;
        s.scales[c] = (var > 0.0) ? std::sqrt(var) * row_norm : 1.0;  // constant column maps to 0
    }
    return s;
}

Matrix FeatureScaler::transform(const Matrix& x) const {
    if (!fitted()) return x;
    if (x.cols() != offsets.size()) throw ArgumentError("FeatureScaler: column count mismatch");
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            out(r, c) = (x(r, c) - offsets[c]) / scales[c];
        }
    }
    return out;
}

Vector FeatureScaler::transform_row(std::span<const double> row) const {
    if (!fitted()) return Vector(row.begin(), row.end());
    if (row.size() != offsets.size()) throw ArgumentError("FeatureScaler: column count mismatch");
    Vector out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
        out[c] = (row[c] - offsets[c]) / scales[c];
    }
    return out;
}

Ae1SvmModel::Ae1SvmModel(const Config& config, std::uint64_t seed) : alpha_(config.alpha) {
    if (config.input_dim < 1) throw ArgumentError("model: input_dim must be >= 1");
    if (config.encoder_dims.empty()) throw ArgumentError("model: encoder_dims must be non-empty");
    if (!(config.alpha >= 0.0)) throw ArgumentError("model: alpha must be non-negative");

    std::vector<std::size_t> enc_dims;
    enc_dims.push_back(config.input_dim);
    enc_dims.insert(enc_dims.end(), config.encoder_dims.begin(), config.encoder_dims.end());
    std::vector<std::size_t> dec_dims(enc_dims.rbegin(), enc_dims.rend());

    encoder_ = DenseNetwork(enc_dims, Activation::Sigmoid, seed, streams::encoder_base);
    decoder_ = DenseNetwork(dec_dims, Activation::Sigmoid, seed, streams::decoder_base);
    // standardized reconstruction targets are unbounded
    decoder_.layers().back().activation = Activation::Identity;
    rff_ = sample_rff(config.encoder_dims.back(), config.rff_dim, config.sigma,
                      derive_seed(seed, streams::rff));
    head_ = OcSvmHead(rff_.feature_dim(), config.nu);
}

Matrix Ae1SvmModel::encode(const Matrix& raw) const {
    return encoder_.forward(preprocess(raw));
}

void Ae1SvmModel::check_consistent() const {
    if (encoder_.layers().empty() || decoder_.layers().empty()) {
        throw ContractError("model: encoder/decoder not initialized");
    }
    if (encoder_.output_dim() != rff_.input_dim()) {
        throw ContractError("model: encoder output dim does not match RFF input dim");
    }
    if (rff_.feature_dim() != head_.w.size()) {
        throw ContractError("model: RFF feature dim does not match head w length");
    }
    if (decoder_.output_dim() != encoder_.input_dim() ||
        decoder_.input_dim() != encoder_.output_dim()) {
        throw ContractError("model: decoder dims do not mirror encoder");
    }
    if (scaler_.fitted() && scaler_.offsets.size() != encoder_.input_dim()) {
        throw ContractError("model: scaler width does not match input dim");
    }
}

double Ae1SvmModel::joint_objective(const Matrix& raw_batch) const {
    if (raw_batch.rows() == 0) throw ArgumentError("joint_objective: empty batch");
    check_consistent();
    const Matrix x = preprocess(raw_batch);
    const Matrix latent = encoder_.forward(x);
    const Matrix x_rec = decoder_.forward(latent);
    const Matrix z = rff_.map_batch(latent);
    return alpha_ * reconstruction_loss(x, x_rec) + svm_objective(head_, z);
}

namespace {

struct ParamSlot {
    std::span<double> params;
    AdamState state;
    ParamSlot(std::span<double> p, double lr) : params(p), state(p.size(), lr) {}
};

// One Adam slot per tensor; iteration order is fixed so runs replay exactly.
class Optimizer {
public:
    Optimizer(std::vector<std::span<double>> tensors, double lr) {
        slots_.reserve(tensors.size());
        for (auto t : tensors) slots_.emplace_back(t, lr);
    }
    void step(const std::vector<std::span<const double>>& grads) {
        if (grads.size() != slots_.size()) throw ContractError("optimizer: gradient count mismatch");
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            adam_step(slots_[i].params, grads[i], slots_[i].state);
        }
    }

private:
    std::vector<ParamSlot> slots_;
};

std::vector<std::span<double>> network_params(DenseNetwork& net) {
    std::vector<std::span<double>> out;
    for (DenseLayer& l : net.layers()) {
        out.push_back(l.weights.flat());
        out.push_back(std::span<double>(l.biases));
    }
    return out;
}

std::vector<std::span<const double>> network_grads(const NetworkGrads& grads) {
    std::vector<std::span<const double>> out;
    for (const LayerGrads& g : grads.layers) {
        out.push_back(g.weights.flat());
        out.push_back(std::span<const double>(g.biases));
    }
    return out;
}

Matrix gather_rows(const Matrix& source, std::span<const std::size_t> indices) {
    Matrix out(indices.size(), source.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto src = source.row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

// d svm_objective / d latent, given the feature-space gradient:
// cos_j contributes -sin(proj_j) omega_j, sin_j contributes cos(proj_j) omega_j.
Matrix rff_backward(const RffMap& rff, const Matrix& latent, const Matrix& z,
                    const Matrix& feature_grad) {
    const std::size_t d_freq = rff.num_frequencies();
    const double scale = std::sqrt(1.0 / static_cast<double>(d_freq));
    Matrix coeffs(latent.rows(), d_freq);
    for (std::size_t i = 0; i < latent.rows(); ++i) {
        for (std::size_t j = 0; j < d_freq; ++j) {
            // z holds scale*cos and scale*sin; divide scale back out.
            const double cos_p = z(i, j) / scale;
            const double sin_p = z(i, d_freq + j) / scale;
            coeffs(i, j) =
                scale * (-feature_grad(i, j) * sin_p + feature_grad(i, d_freq + j) * cos_p);
        }
    }
    return matmul(coeffs, rff.omegas());
}

}  // namespace

TrainReport Ae1SvmModel::fit(const LabeledDataset& data, const TrainConfig& cfg) {
    check_consistent();
    if (data.rows() == 0) throw ArgumentError("fit: empty dataset");
    if (data.cols() != input_dim()) {
        throw ArgumentError("fit: dataset has " + std::to_string(data.cols()) +
                            " features, model expects " + std::to_string(input_dim()));
    }
    if (cfg.batch_size < 1) throw ArgumentError("fit: batch_size must be >= 1");
    if (cfg.batch_size > data.rows()) {
        throw ArgumentError("fit: batch_size " + std::to_string(cfg.batch_size) +
                            " exceeds dataset size " + std::to_string(data.rows()));
    }
    if (!(cfg.learning_rate > 0.0)) throw ArgumentError("fit: learning_rate must be positive");

    const auto t_start = std::chrono::steady_clock::now();
    scaler_ = FeatureScaler::fit(data.features);
    const Matrix x_all = scaler_.transform(data.features);

    TrainReport report;
    report.n_train = data.rows();

    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), 0);

    auto run_phase = [&](bool train_autoencoder, bool train_head, bool joint,
                         std::size_t epoch_offset) {
        std::vector<std::span<double>> tensors;
        if (train_autoencoder) {
            auto enc = network_params(encoder_);
            auto dec = network_params(decoder_);
            tensors.insert(tensors.end(), enc.begin(), enc.end());
            tensors.insert(tensors.end(), dec.begin(), dec.end());
        }
        if (train_head) {
            tensors.push_back(std::span<double>(head_.w));
            tensors.push_back(std::span<double>(&head_.rho, 1));
        }
        Optimizer optimizer(std::move(tensors), cfg.learning_rate);

        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            std::mt19937_64 rng =
                seeded_rng(cfg.seed, streams::shuffle_base + epoch_offset + epoch);
            std::shuffle(order.begin(), order.end(), rng);

            double objective_sum = 0.0;
            std::size_t n_batches = 0;
            for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
                const std::size_t len = std::min(cfg.batch_size, order.size() - start);
                const Matrix batch =
                    gather_rows(x_all, std::span(order.data() + start, len));

                ForwardCache enc_cache;
                const Matrix latent = encoder_.forward(batch, &enc_cache);

                double objective = 0.0;
                NetworkGrads enc_grads, dec_grads;
                SvmParamGrads head_grads;
                Matrix latent_grad(latent.rows(), latent.cols());

                if (train_autoencoder) {
                    ForwardCache dec_cache;
                    const Matrix x_rec = decoder_.forward(latent, &dec_cache);
                    const double rec = reconstruction_loss(batch, x_rec);
                    Matrix rec_grad = reconstruction_loss_grad(batch, x_rec);
                    const double weight = joint ? alpha_ : 1.0;
                    objective += weight * rec;
                    for (double& g : rec_grad.flat()) g *= weight;
                    BackwardResult dec_back = decoder_.backward(dec_cache, rec_grad);
                    dec_grads = std::move(dec_back.param_grads);
                    latent_grad = std::move(dec_back.input_grad);
                }
                if (train_head) {
                    const Matrix z = rff_.map_batch(latent);
                    objective += svm_objective(head_, z);
                    head_grads = svm_param_grads(head_, z);
                    if (train_autoencoder) {
                        const Matrix z_grad = svm_feature_grads(head_, z);
                        const Matrix svm_latent = rff_backward(rff_, latent, z, z_grad);
                        for (std::size_t i = 0; i < latent_grad.size(); ++i) {
                            latent_grad.flat()[i] += svm_latent.flat()[i];
                        }
                    }
                }
                if (!std::isfinite(objective)) {
                    throw TrainingError("non-finite objective at epoch " +
                                        std::to_string(epoch_offset + epoch) + ", batch " +
                                        std::to_string(n_batches));
                }
                if (train_autoencoder) {
                    BackwardResult enc_back = encoder_.backward(enc_cache, latent_grad);
                    enc_grads = std::move(enc_back.param_grads);
                }

                std::vector<std::span<const double>> grads;
                if (train_autoencoder) {
                    auto eg = network_grads(enc_grads);
                    auto dg = network_grads(dec_grads);
                    grads.insert(grads.end(), eg.begin(), eg.end());
                    grads.insert(grads.end(), dg.begin(), dg.end());
                }
                if (train_head) {
                    grads.push_back(std::span<const double>(head_grads.grad_w));
                    grads.push_back(std::span<const double>(&head_grads.grad_rho, 1));
                }
                optimizer.step(grads);

                objective_sum += objective;
                ++n_batches;
            }
            report.epoch_objectives.push_back(objective_sum / static_cast<double>(n_batches));
        }
    };

    if (cfg.mode == TrainMode::Joint) {
        run_phase(true, true, true, 0);
    } else {
        run_phase(true, false, false, 0);           // autoencoder on reconstruction alone
        run_phase(false, true, false, cfg.epochs);  // frozen encoder, SVM head
    }

    report.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

Vector Ae1SvmModel::score(const Matrix& samples) const {
    check_consistent();
    if (samples.cols() != input_dim()) {
        throw ArgumentError("score: samples have " + std::to_string(samples.cols()) +
                            " features, model expects " + std::to_string(input_dim()));
    }
    const Matrix latent = encode(samples);
    const Matrix z = rff_.map_batch(latent);
    return margin_batch(head_, z);
}

// ---------------------------------------------------------------------------
// Serialization: little-endian binary container, bit-exact round trip.

namespace {

constexpr char kMagic[8] = {'A', 'E', '1', 'S', 'V', 'M', 'B', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_f64_span(std::ostream& out, std::span<const double> values) {
    write_u64(out, values.size());
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
Vector read_f64_vector(std::istream& in) {
    const std::uint64_t n = read_u64(in);
    Vector v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}

void write_network(std::ostream& out, const DenseNetwork& net) {
    write_u64(out, net.layers().size());
    for (const DenseLayer& l : net.layers()) {
        write_u64(out, l.fan_in());
        write_u64(out, l.fan_out());
        write_u32(out, static_cast<std::uint32_t>(l.activation));
        write_f64_span(out, l.weights.flat());
        write_f64_span(out, l.biases);
    }
}

DenseNetwork read_network(std::istream& in) {
    DenseNetwork net;
    const std::uint64_t n_layers = read_u64(in);
    net.layers().resize(n_layers);
    for (std::uint64_t i = 0; i < n_layers; ++i) {
        DenseLayer& l = net.layers()[i];
        const std::uint64_t fan_in = read_u64(in);
        const std::uint64_t fan_out = read_u64(in);
        const std::uint32_t act = read_u32(in);
        if (act > 2) throw DataError("model file: bad activation code");
        l.activation = static_cast<Activation>(act);
        Vector w = read_f64_vector(in);
        if (w.size() != fan_in * fan_out) throw DataError("model file: weight size mismatch");
        l.weights = Matrix(fan_in, fan_out);
        std::copy(w.begin(), w.end(), l.weights.flat().begin());
        l.biases = read_f64_vector(in);
        if (l.biases.size() != fan_out) throw DataError("model file: bias size mismatch");
    }
    return net;
}

}  // namespace

void Ae1SvmModel::save(const std::filesystem::path& path) const {
    check_consistent();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path.string());

    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kFormatVersion);
    write_f64(out, alpha_);
    write_network(out, encoder_);
    write_network(out, decoder_);

    write_u64(out, rff_.num_frequencies());
    write_u64(out, rff_.input_dim());
    write_f64(out, rff_.sigma());
    write_f64_span(out, rff_.omegas().flat());

    write_f64_span(out, head_.w);
    write_f64(out, head_.rho);
    write_f64(out, head_.nu);

    write_u32(out, scaler_.fitted() ? 1 : 0);
    if (scaler_.fitted()) {
        write_f64_span(out, scaler_.offsets);
        write_f64_span(out, scaler_.scales);
    }
    if (!out) throw DataError("model write failed: " + path.string());
}

Ae1SvmModel Ae1SvmModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path.string());

    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError("not a model file: " + path.string());
    }
    const std::uint32_t version = read_u32(in);
    if (version != kFormatVersion) {
        throw DataError("unsupported model format version " + std::to_string(version));
    }

    Ae1SvmModel model;
    model.alpha_ = read_f64(in);
    model.encoder_ = read_network(in);
    model.decoder_ = read_network(in);

    const std::uint64_t n_freq = read_u64(in);
    const std::uint64_t latent_dim = read_u64(in);
    const double sigma = read_f64(in);
    Vector omegas_flat = read_f64_vector(in);
    if (omegas_flat.size() != n_freq * latent_dim) {
        throw DataError("model file: omega size mismatch");
    }
    Matrix omegas(n_freq, latent_dim);
    std::copy(omegas_flat.begin(), omegas_flat.end(), omegas.flat().begin());
    model.rff_ = RffMap(std::move(omegas), sigma);

    model.head_.w = read_f64_vector(in);
    model.head_.rho = read_f64(in);
    model.head_.nu = read_f64(in);

    if (read_u32(in) != 0) {
        model.scaler_.offsets = read_f64_vector(in);
        model.scaler_.scales = read_f64_vector(in);
    }
    if (!in) throw DataError("truncated model file: " + path.string());
    model.check_consistent();
    return model;
}

}  // namespace ae1svm
