#include "ae1svm/ocsvm.hpp"

#include <cmath>
#include <string>

#include "ae1svm/errors.hpp"

namespace ae1svm {

OcSvmHead::OcSvmHead(std::size_t feature_dim, double nu_param) : w(feature_dim, 0.0), nu(nu_param) {
    if (feature_dim < 1) throw ArgumentError("OcSvmHead: feature_dim must be >= 1");
    if (!(nu > 0.0) || nu > 1.0) throw ArgumentError("OcSvmHead: nu must be in (0, 1]");
}

double margin(const OcSvmHead& head, std::span<const double> z) {
    if (z.size() != head.w.size()) {
        throw ArgumentError("margin: feature length " + std::to_string(z.size()) +
                            " does not match w length " + std::to_string(head.w.size()));
    }
    return dot(head.w, z) - head.rho;
}

Vector margin_batch(const OcSvmHead& head, const Matrix& features) {
    Vector margins(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        margins[i] = margin(head, features.row(i));
    }
    return margins;
}

int decide(const OcSvmHead& head, std::span<const double> z) {
    return margin(head, z) >= 0.0 ? 1 : -1;
}

double svm_objective(const OcSvmHead& head, const Matrix& features) {
    if (features.rows() == 0) throw ArgumentError("svm_objective: empty batch");
    if (features.cols() != head.w.size()) {
        throw ArgumentError("svm_objective: feature width mismatch");
    }
    const double n = static_cast<double>(features.rows());
    double hinge_sum = 0.0;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const double slack = head.rho - dot(head.w, features.row(i));
        if (slack > 0.0) hinge_sum += slack;
    }
    return 0.5 * dot(head.w, head.w) - head.rho + hinge_sum / (head.nu * n);
}

SvmParamGrads svm_param_grads(const OcSvmHead& head, const Matrix& features) {
    if (features.rows() == 0) throw ArgumentError("svm_param_grads: empty batch");
    if (features.cols() != head.w.size()) {
        throw ArgumentError("svm_param_grads: feature width mismatch");
    }
    const double inv_nu_n = 1.0 / (head.nu * static_cast<double>(features.rows()));
    SvmParamGrads grads;
    grads.grad_w = head.w;
    std::size_t active = 0;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto z = features.row(i);
        // strict inequality: subgradient 0 at the kink
        if (head.rho - dot(head.w, z) > 0.0) {
            ++active;
            for (std::size_t j = 0; j < z.size(); ++j) {
                grads.grad_w[j] -= inv_nu_n * z[j];
            }
        }
    }
    grads.grad_rho = -1.0 + inv_nu_n * static_cast<double>(active);
    return grads;
}

Matrix svm_feature_grads(const OcSvmHead& head, const Matrix& features) {
    if (features.rows() == 0) throw ArgumentError("svm_feature_grads: empty batch");
    if (features.cols() != head.w.size()) {
        throw ArgumentError("svm_feature_grads: feature width mismatch");
    }
    const double inv_nu_n = 1.0 / (head.nu * static_cast<double>(features.rows()));
    Matrix grads(features.rows(), features.cols());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        if (head.rho - dot(head.w, features.row(i)) > 0.0) {
            auto row = grads.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j] = -inv_nu_n * head.w[j];
            }
        }
    }
    return grads;
}

Vector margin_input_grad(const OcSvmHead& head, const RffMap& rff, std::span<const double> x) {
    if (x.size() != rff.input_dim()) {
        throw ArgumentError("margin_input_grad: input length mismatch");
    }
    if (head.w.size() != rff.feature_dim()) {
        throw ArgumentError("margin_input_grad: w length does not match feature dim");
    }
    const std::size_t d_freq = rff.num_frequencies();
    const double scale = std::sqrt(1.0 / static_cast<double>(d_freq));
    Vector grad(x.size(), 0.0);
    for (std::size_t j = 0; j < d_freq; ++j) {
        auto omega = rff.omegas().row(j);
        const double proj = dot(omega, x);
        const double coeff = -head.w[j] * std::sin(proj) + head.w[d_freq + j] * std::cos(proj);
        for (std::size_t k = 0; k < x.size(); ++k) {
            grad[k] += omega[k] * coeff;
        }
    }
    for (double& g : grad) g *= scale;
    return grad;
}

}  // namespace ae1svm
