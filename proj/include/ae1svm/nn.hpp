#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ae1svm/matrix.hpp"

namespace ae1svm {

enum class Activation { Sigmoid, Tanh, Identity };

double activate(Activation act, double pre);
// Activation derivative expressed through the activation output u:
// sigmoid -> u(1-u), tanh -> 1-u^2, identity -> 1.
double activation_grad(Activation act, double output);

// Entries drawn uniformly on [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))].
Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, std::uint64_t rng_seed);

struct DenseLayer {
    Matrix weights;  // fan_in x fan_out
    Vector biases;   // fan_out, zero-initialized
    Activation activation = Activation::Sigmoid;

    DenseLayer() = default;
    DenseLayer(std::size_t fan_in, std::size_t fan_out, Activation act, std::uint64_t rng_seed);

    std::size_t fan_in() const { return weights.rows(); }
    std::size_t fan_out() const { return weights.cols(); }
};

// Per-layer tensors captured by forward() and consumed by backward().
struct LayerCache {
    Matrix input;   // what entered the layer
    Matrix output;  // post-activation
};

struct ForwardCache {
    std::vector<LayerCache> layers;
};

struct LayerGrads {
    Matrix weights;
    Vector biases;
};

struct NetworkGrads {
    std::vector<LayerGrads> layers;
};

struct BackwardResult {
    NetworkGrads param_grads;
    Matrix input_grad;
};

class DenseNetwork {
public:
    DenseNetwork() = default;

    // layer_dims = {input, hidden..., output}; one weight matrix per
    // consecutive pair. Layer i is Xavier-initialized from
    // derive_seed(seed, seed_stream_base + i).
    DenseNetwork(const std::vector<std::size_t>& layer_dims, Activation act,
                 std::uint64_t seed, std::uint64_t seed_stream_base);

    Matrix forward(const Matrix& batch, ForwardCache* cache = nullptr) const;
    BackwardResult backward(const ForwardCache& cache, const Matrix& upstream_grad) const;

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::vector<std::size_t> layer_dims() const;

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

private:
    std::vector<DenseLayer> layers_;
};

// Mean over batch rows of the squared Euclidean distance.
double reconstruction_loss(const Matrix& x, const Matrix& x_rec);
// d loss / d x_rec = 2 (x_rec - x) / batch_size.
Matrix reconstruction_loss_grad(const Matrix& x, const Matrix& x_rec);

struct AdamState {
    Vector first_moment;
    Vector second_moment;
    std::int64_t step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    AdamState(std::size_t n_params, double lr);
};

// Standard Adam update with bias correction; increments step_count.
// Throws TrainingError on non-finite gradients.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace ae1svm
