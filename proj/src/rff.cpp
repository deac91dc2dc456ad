#include "ae1svm/rff.hpp"

#include <cmath>
#include <string>

#include "ae1svm/errors.hpp"
#include "ae1svm/rng.hpp"

namespace ae1svm {

RffMap::RffMap(Matrix omegas, double sigma) : omegas_(std::move(omegas)), sigma_(sigma) {
    if (omegas_.rows() < 1 || omegas_.cols() < 1) {
        throw ArgumentError("RffMap: omegas must be non-empty");
    }
    if (!(sigma_ > 0.0)) throw ArgumentError("RffMap: sigma must be positive");
}

Vector RffMap::map(std::span<const double> x) const {
    if (x.size() != input_dim()) {
        throw ArgumentError("RffMap::map: input has length " + std::to_string(x.size()) +
                            ", expected " + std::to_string(input_dim()));
    }
    const std::size_t d_freq = num_frequencies();
    const double scale = std::sqrt(1.0 / static_cast<double>(d_freq));
    Vector z(2 * d_freq);
    for (std::size_t j = 0; j < d_freq; ++j) {
        const double proj = dot(omegas_.row(j), x);
        z[j] = scale * std::cos(proj);
        z[d_freq + j] = scale * std::sin(proj);
    }
    return z;
}

Matrix RffMap::map_batch(const Matrix& points) const {
    if (points.cols() != input_dim()) {
        throw ArgumentError("RffMap::map_batch: column count mismatch");
    }
    const std::size_t d_freq = num_frequencies();
    const double scale = std::sqrt(1.0 / static_cast<double>(d_freq));
    Matrix projections = matmul(points, transpose(omegas_));  // n x D
    Matrix z(points.rows(), 2 * d_freq);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        for (std::size_t j = 0; j < d_freq; ++j) {
            const double proj = projections(i, j);
            z(i, j) = scale * std::cos(proj);
            z(i, d_freq + j) = scale * std::sin(proj);
        }
    }
    return z;
}

RffMap sample_rff(std::size_t input_dim, std::size_t num_frequencies, double sigma,
                  std::uint64_t rng_seed) {
    if (input_dim < 1) throw ArgumentError("sample_rff: input_dim must be >= 1");
    if (num_frequencies < 1) throw ArgumentError("sample_rff: num_frequencies must be >= 1");
    if (!(sigma > 0.0)) throw ArgumentError("sample_rff: sigma must be positive");
    std::mt19937_64 rng = seeded_rng(rng_seed);
    std::normal_distribution<double> dist(0.0, 1.0 / sigma);
    Matrix omegas(num_frequencies, input_dim);
    for (double& v : omegas.flat()) v = dist(rng);
    return RffMap(std::move(omegas), sigma);
}

double rbf_kernel(std::span<const double> x, std::span<const double> x2, double sigma) {
    if (x.size() != x2.size()) throw ArgumentError("rbf_kernel: length mismatch");
    if (!(sigma > 0.0)) throw ArgumentError("rbf_kernel: sigma must be positive");
    return std::exp(-squared_distance(x, x2) / (2.0 * sigma * sigma));
}

}  // namespace ae1svm
