#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ae1svm/data.hpp"
#include "ae1svm/matrix.hpp"
#include "ae1svm/nn.hpp"
#include "ae1svm/ocsvm.hpp"
#include "ae1svm/rff.hpp"

namespace ae1svm {

// Per-column affine scaling (x - offset) / scale, fitted on training
// data as standardization (offset = mean, scale = std) and stored with
// the model so scoring sees the same transform. Constant columns keep
// scale 1 and map to 0.
struct FeatureScaler {
    Vector offsets;
    Vector scales;

    bool fitted() const { return !offsets.empty(); }
    static FeatureScaler fit(const Matrix& x);

    Matrix transform(const Matrix& x) const;
    Vector transform_row(std::span<const double> row) const;
    // d scaled_k / d raw_k
    double input_jacobian(std::size_t k) const { return 1.0 / scales[k]; }
};

enum class TrainMode { Joint, TwoStage };

struct TrainConfig {
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::Joint;
};

struct TrainReport {
    // Joint: mean joint objective per epoch. TwoStage: reconstruction
    // loss for the first cfg.epochs entries, then the SVM objective for
    // the next cfg.epochs.
    std::vector<double> epoch_objectives;
    double train_seconds = 0.0;
    std::size_t n_train = 0;
};

// Encoder -> RFF map -> OC-SVM head, with a mirrored decoder providing
// the reconstruction term. All trainable parameters (encoder, decoder,
// w, rho) share one Adam learning rate; omegas stay frozen.
class Ae1SvmModel {
public:
    struct Config {
        std::size_t input_dim = 0;
        std::vector<std::size_t> encoder_dims;  // hidden dims, last = bottleneck
        std::size_t rff_dim = 500;              // D; feature space is 2D
        double sigma = 3.0;
        double nu = 0.5;
        double alpha = 1.0;
    };

    Ae1SvmModel() = default;
    Ae1SvmModel(const Config& config, std::uint64_t seed);

    // alpha * reconstruction_loss + svm_objective, on the scaled batch.
    double joint_objective(const Matrix& raw_batch) const;

    TrainReport fit(const LabeledDataset& data, const TrainConfig& cfg);

    // Margin per sample; higher = more normal, sign = decision.
    Vector score(const Matrix& samples) const;

    Matrix preprocess(const Matrix& raw) const { return scaler_.transform(raw); }
    Matrix encode(const Matrix& raw) const;

    std::size_t input_dim() const { return encoder_.input_dim(); }
    std::size_t latent_dim() const { return encoder_.output_dim(); }
    double alpha() const { return alpha_; }

    const DenseNetwork& encoder() const { return encoder_; }
    const DenseNetwork& decoder() const { return decoder_; }
    const RffMap& rff() const { return rff_; }
    const OcSvmHead& head() const { return head_; }
    const FeatureScaler& scaler() const { return scaler_; }

    DenseNetwork& encoder() { return encoder_; }
    DenseNetwork& decoder() { return decoder_; }
    OcSvmHead& head() { return head_; }
    FeatureScaler& scaler() { return scaler_; }

    // Checks the encoder/rff/head/decoder wiring; throws ContractError.
    void check_consistent() const;

    // Versioned binary container; save -> load round-trips bit-exactly.
    void save(const std::filesystem::path& path) const;
    static Ae1SvmModel load(const std::filesystem::path& path);

private:
    DenseNetwork encoder_;
    DenseNetwork decoder_;
    RffMap rff_;
    OcSvmHead head_;
    FeatureScaler scaler_;
    double alpha_ = 1.0;
};

}  // namespace ae1svm
