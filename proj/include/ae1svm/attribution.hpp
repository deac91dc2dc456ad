#pragma once

#include <filesystem>
#include <span>

#include "ae1svm/matrix.hpp"
#include "ae1svm/model.hpp"
#include "ae1svm/nn.hpp"

namespace ae1svm {

// Signed per-feature gradient of the margin, split into its positive
// and negative parts (gradient == positive_part - negative_part).
struct AttributionResult {
    Vector gradient;
    Vector positive_part;
    Vector negative_part;
    std::size_t sample_index = 0;
};

// Jacobian of one dense layer at `input`: entry (n, m) is
// weights(m, n) * act'(u_n), with the derivative expressed through the
// layer output u.
Matrix layer_grad(const DenseLayer& layer, std::span<const double> input);

// Gradient of the margin w.r.t. the raw input features: the closed-form
// RFF margin gradient chained back through the encoder layers and the
// stored column scaling.
AttributionResult end_to_end_grad(const Ae1SvmModel& model, std::span<const double> raw_sample,
                                  std::size_t sample_index = 0);

struct GradientMaps {
    Matrix positive;
    Matrix negative;
    Matrix full;  // elementwise |gradient|
};

// Row-major reshape; height * width must equal the gradient length.
GradientMaps gradient_map(const AttributionResult& result, std::size_t height, std::size_t width);

// 8-bit binary PGM, values min-max scaled per grid to 0..255.
void write_pgm(const Matrix& grid, const std::filesystem::path& path);
// Plain comma-separated grid, one CSV row per grid row.
void write_grid_csv(const Matrix& grid, const std::filesystem::path& path);

}  // namespace ae1svm
