#include "ae1svm/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "ae1svm/errors.hpp"
#include "ae1svm/numio.hpp"
#include "ae1svm/ocsvm.hpp"

namespace ae1svm {

Matrix layer_grad(const DenseLayer& layer, std::span<const double> input) {
    if (input.size() != layer.fan_in()) {
        throw ArgumentError("layer_grad: input length " + std::to_string(input.size()) +
                            " does not match fan_in " + std::to_string(layer.fan_in()));
    }
    Matrix jac(layer.fan_out(), layer.fan_in());
    for (std::size_t n = 0; n < layer.fan_out(); ++n) {
        double pre = layer.biases[n];
        for (std::size_t m = 0; m < layer.fan_in(); ++m) {
            pre += input[m] * layer.weights(m, n);
        }
        const double u = activate(layer.activation, pre);
        const double du = activation_grad(layer.activation, u);
        for (std::size_t m = 0; m < layer.fan_in(); ++m) {
            jac(n, m) = layer.weights(m, n) * du;
        }
    }
    return jac;
}

AttributionResult end_to_end_grad(const Ae1SvmModel& model, std::span<const double> raw_sample,
                                  std::size_t sample_index) {
    model.check_consistent();
    if (raw_sample.size() != model.input_dim()) {
        throw ArgumentError("end_to_end_grad: sample has " + std::to_string(raw_sample.size()) +
                            " features, model expects " + std::to_string(model.input_dim()));
    }

    const Vector scaled = model.scaler().transform_row(raw_sample);
    Matrix x(1, scaled.size());
    std::copy(scaled.begin(), scaled.end(), x.row(0).begin());

    ForwardCache cache;
    const Matrix latent = model.encoder().forward(x, &cache);
    const Vector latent_grad = margin_input_grad(model.head(), model.rff(), latent.row(0));

    Matrix upstream(1, latent_grad.size());
    std::copy(latent_grad.begin(), latent_grad.end(), upstream.row(0).begin());
    const BackwardResult back = model.encoder().backward(cache, upstream);

    AttributionResult result;
    result.sample_index = sample_index;
    result.gradient.resize(raw_sample.size());
    result.positive_part.resize(raw_sample.size());
    result.negative_part.resize(raw_sample.size());
    for (std::size_t k = 0; k < raw_sample.size(); ++k) {
        double g = back.input_grad(0, k);
        if (model.scaler().fitted()) g *= model.scaler().input_jacobian(k);
        result.gradient[k] = g;
        result.positive_part[k] = std::max(g, 0.0);
        result.negative_part[k] = std::max(-g, 0.0);
    }
    return result;
}

GradientMaps gradient_map(const AttributionResult& result, std::size_t height, std::size_t width) {
    if (height * width != result.gradient.size()) {
        throw ArgumentError("gradient_map: " + std::to_string(height) + "x" +
                            std::to_string(width) + " does not match gradient length " +
                            std::to_string(result.gradient.size()));
    }
    GradientMaps maps{Matrix(height, width), Matrix(height, width), Matrix(height, width)};
    for (std::size_t i = 0; i < result.gradient.size(); ++i) {
        const std::size_t r = i / width;
        const std::size_t c = i % width;
        maps.positive(r, c) = result.positive_part[i];
        maps.negative(r, c) = result.negative_part[i];
        maps.full(r, c) = std::abs(result.gradient[i]);
    }
    return maps;
}

void write_pgm(const Matrix& grid, const std::filesystem::path& path) {
    if (grid.empty()) throw ArgumentError("write_pgm: empty grid");
    double lo = grid.flat()[0];
    double hi = grid.flat()[0];
    for (double v : grid.flat()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double width = (hi > lo) ? (hi - lo) : 1.0;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << "P5\n" << grid.cols() << ' ' << grid.rows() << "\n255\n";
    for (double v : grid.flat()) {
        const double scaled = (v - lo) / width * 255.0;
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(scaled))));
    }
    if (!out) throw DataError("write failed: " + path.string());
}

void write_grid_csv(const Matrix& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        auto row = grid.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_double(row[c]);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace ae1svm
