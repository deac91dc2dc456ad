#include "ae1svm/nn.hpp"

#include <cmath>
#include <string>

#include "ae1svm/errors.hpp"
#include "ae1svm/rng.hpp"

namespace ae1svm {

double activate(Activation act, double pre) {
    switch (act) {
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-pre));
        case Activation::Tanh: return std::tanh(pre);
        case Activation::Identity: return pre;
    }
    throw ArgumentError("unknown activation");
}

double activation_grad(Activation act, double output) {
    switch (act) {
        case Activation::Sigmoid: return output * (1.0 - output);
        case Activation::Tanh: return 1.0 - output * output;
        case Activation::Identity: return 1.0;
    }
    throw ArgumentError("unknown activation");
}

Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, std::uint64_t rng_seed) {
    if (fan_in < 1 || fan_out < 1) {
        throw ArgumentError("xavier_init: fan_in and fan_out must be >= 1");
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::mt19937_64 rng = seeded_rng(rng_seed);
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix weights(fan_in, fan_out);
    for (double& v : weights.flat()) v = dist(rng);
    return weights;
}

DenseLayer::DenseLayer(std::size_t fan_in, std::size_t fan_out, Activation act,
                       std::uint64_t rng_seed)
    : weights(xavier_init(fan_in, fan_out, rng_seed)), biases(fan_out, 0.0), activation(act) {}

DenseNetwork::DenseNetwork(const std::vector<std::size_t>& layer_dims, Activation act,
                           std::uint64_t seed, std::uint64_t seed_stream_base) {
    if (layer_dims.size() < 2) {
        throw ArgumentError("DenseNetwork: need at least input and output dims");
    }
    for (std::size_t d : layer_dims) {
        if (d < 1) throw ArgumentError("DenseNetwork: layer dims must be >= 1");
    }
    layers_.reserve(layer_dims.size() - 1);
    for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
        layers_.emplace_back(layer_dims[i], layer_dims[i + 1], act,
                             derive_seed(seed, seed_stream_base + i));
    }
}

std::size_t DenseNetwork::input_dim() const {
    return layers_.empty() ? 0 : layers_.front().fan_in();
}

std::size_t DenseNetwork::output_dim() const {
    return layers_.empty() ? 0 : layers_.back().fan_out();
}

std::vector<std::size_t> DenseNetwork::layer_dims() const {
    std::vector<std::size_t> dims;
    if (layers_.empty()) return dims;
    dims.push_back(layers_.front().fan_in());
    for (const DenseLayer& l : layers_) dims.push_back(l.fan_out());
    return dims;
}

Matrix DenseNetwork::forward(const Matrix& batch, ForwardCache* cache) const {
    if (layers_.empty()) throw ContractError("forward: empty network");
    if (batch.cols() != input_dim()) {
        throw ArgumentError("forward: batch has " + std::to_string(batch.cols()) +
                            " columns, network expects " + std::to_string(input_dim()));
    }
    if (cache) {
        cache->layers.clear();
        cache->layers.reserve(layers_.size());
    }
    Matrix current = batch;
    for (const DenseLayer& layer : layers_) {
        Matrix out = matmul(current, layer.weights);
        for (std::size_t i = 0; i < out.rows(); ++i) {
            auto row = out.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j] = activate(layer.activation, row[j] + layer.biases[j]);
            }
        }
        if (cache) cache->layers.push_back({std::move(current), out});
        current = std::move(out);
    }
    return current;
}

BackwardResult DenseNetwork::backward(const ForwardCache& cache, const Matrix& upstream_grad) const {
    if (cache.layers.size() != layers_.size()) {
        throw ContractError("backward: cache has " + std::to_string(cache.layers.size()) +
                            " layers, network has " + std::to_string(layers_.size()));
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (cache.layers[i].input.cols() != layers_[i].fan_in() ||
            cache.layers[i].output.cols() != layers_[i].fan_out()) {
            throw ContractError("backward: cache shapes do not match network layer " +
                                std::to_string(i));
        }
    }
    if (upstream_grad.rows() != cache.layers.back().output.rows() ||
        upstream_grad.cols() != layers_.back().fan_out()) {
        throw ContractError("backward: upstream gradient shape mismatch");
    }

    NetworkGrads grads;
    grads.layers.resize(layers_.size());
    Matrix delta = upstream_grad;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const DenseLayer& layer = layers_[li];
        const LayerCache& lc = cache.layers[li];

        // delta <- upstream (.) act'(output)
        for (std::size_t i = 0; i < delta.rows(); ++i) {
            for (std::size_t j = 0; j < delta.cols(); ++j) {
                delta(i, j) *= activation_grad(layer.activation, lc.output(i, j));
            }
        }

        LayerGrads& lg = grads.layers[li];
        lg.weights = matmul(transpose(lc.input), delta);
        lg.biases.assign(layer.fan_out(), 0.0);
        for (std::size_t i = 0; i < delta.rows(); ++i) {
            for (std::size_t j = 0; j < delta.cols(); ++j) {
                lg.biases[j] += delta(i, j);
            }
        }

        delta = matmul(delta, transpose(layer.weights));
    }
    return {std::move(grads), std::move(delta)};
}

double reconstruction_loss(const Matrix& x, const Matrix& x_rec) {
    if (x.rows() != x_rec.rows() || x.cols() != x_rec.cols()) {
        throw ArgumentError("reconstruction_loss: shape mismatch");
    }
    if (x.rows() == 0) throw ArgumentError("reconstruction_loss: empty batch");
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        total += squared_distance(x.row(i), x_rec.row(i));
    }
    return total / static_cast<double>(x.rows());
}

Matrix reconstruction_loss_grad(const Matrix& x, const Matrix& x_rec) {
    if (x.rows() != x_rec.rows() || x.cols() != x_rec.cols()) {
        throw ArgumentError("reconstruction_loss_grad: shape mismatch");
    }
    const double scale = 2.0 / static_cast<double>(x.rows());
    Matrix grad(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            grad(i, j) = scale * (x_rec(i, j) - x(i, j));
        }
    }
    return grad;
}

AdamState::AdamState(std::size_t n_params, double lr)
    : first_moment(n_params, 0.0), second_moment(n_params, 0.0), learning_rate(lr) {}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        throw ArgumentError("adam_step: parameter/gradient/state size mismatch");
    }
    if (!all_finite(grads)) {
        throw TrainingError("adam_step: non-finite gradient");
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bias1 = 1.0 - std::pow(state.beta1, t);
    const double bias2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * grads[i];
        v = state.beta2 * v + (1.0 - state.beta2) * grads[i] * grads[i];
        const double m_hat = m / bias1;
        const double v_hat = v / bias2;
        params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

}  // namespace ae1svm
