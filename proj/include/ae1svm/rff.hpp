#pragma once

#include <cstdint>
#include <span>

#include "ae1svm/matrix.hpp"

namespace ae1svm {

// Random Fourier feature map approximating the RBF kernel. Frequencies
// are sampled once and frozen; the optimizer never touches them.
//
// map(x) = sqrt(1/D) [cos(w_1.x) ... cos(w_D.x) sin(w_1.x) ... sin(w_D.x)],
// so ||map(x)|| = 1 for every x and map(x).map(x') approximates
// exp(-||x-x'||^2 / (2 sigma^2)).
class RffMap {
public:
    RffMap() = default;
    RffMap(Matrix omegas, double sigma);

    Vector map(std::span<const double> x) const;
    Matrix map_batch(const Matrix& points) const;

    std::size_t input_dim() const { return omegas_.cols(); }        // d
    std::size_t num_frequencies() const { return omegas_.rows(); }  // D
    std::size_t feature_dim() const { return 2 * omegas_.rows(); }

    const Matrix& omegas() const { return omegas_; }
    double sigma() const { return sigma_; }

private:
    Matrix omegas_;  // D x d
    double sigma_ = 0.0;
};

// Draws omegas[i][j] ~ iid Normal(0, 1/sigma^2), deterministic per seed.
RffMap sample_rff(std::size_t input_dim, std::size_t num_frequencies, double sigma,
                  std::uint64_t rng_seed);

// Exact RBF kernel; test oracle and diagnostics only.
double rbf_kernel(std::span<const double> x, std::span<const double> x2, double sigma);

}  // namespace ae1svm
