#pragma once

#include <span>

#include "ae1svm/matrix.hpp"
#include "ae1svm/rff.hpp"

namespace ae1svm {

// Linear one-class SVM head operating on RFF features. Minimizing
//   1/2 ||w||^2 - rho + (1/(nu n)) sum_i max(0, rho - w.z_i)
// pushes the feature vectors to the positive side of the hyperplane
// w.z = rho; samples left on the origin side are anomalies.
struct OcSvmHead {
    Vector w;          // length 2D
    double rho = 0.0;
    double nu = 0.5;   // in (0, 1]; upper bound on the anomaly fraction

    OcSvmHead() = default;
    OcSvmHead(std::size_t feature_dim, double nu);
};

// w.z - rho
double margin(const OcSvmHead& head, std::span<const double> z);
Vector margin_batch(const OcSvmHead& head, const Matrix& features);

// +1 (normal) when margin >= 0, -1 (anomaly) otherwise.
int decide(const OcSvmHead& head, std::span<const double> z);

// Hinge-form objective over a feature batch; n = batch size.
double svm_objective(const OcSvmHead& head, const Matrix& features);

struct SvmParamGrads {
    Vector grad_w;
    double grad_rho = 0.0;
};

// Subgradient of svm_objective; 0 chosen at the hinge kink.
SvmParamGrads svm_param_grads(const OcSvmHead& head, const Matrix& features);

// d svm_objective / d z_i: -w/(nu n) on rows with rho - w.z_i > 0, else 0.
Matrix svm_feature_grads(const OcSvmHead& head, const Matrix& features);

// Closed-form gradient of margin(map(x)) w.r.t. x:
//   dg/dx_k = sqrt(1/D) sum_j omega_jk [-w_j sin(w_j.x) + w_{j+D} cos(w_j.x)]
Vector margin_input_grad(const OcSvmHead& head, const RffMap& rff, std::span<const double> x);

}  // namespace ae1svm
