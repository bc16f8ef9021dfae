#include "loggpis/covariance.hpp"

#include <cmath>

#include "loggpis/error.hpp"

namespace loggpis {

std::string_view ToString(KernelKind kind) {
    return kind == KernelKind::kWhittle ? "whittle" : "matern32";
}

KernelKind KernelKindFromString(std::string_view name) {
    if (name == "whittle") return KernelKind::kWhittle;
    if (name == "matern32") return KernelKind::kMatern32;
    throw Error(ErrorCode::kUnsupportedKernel, "unknown kernel '" + std::string(name) + "'");
}

void KernelParams::Validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw Error(ErrorCode::kInvalidInput, "lambda must be positive and finite");
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw Error(ErrorCode::kInvalidInput, "sigma2 must be positive and finite");
    }
    if (!(noise_y >= 0.0) || !(noise_grad >= 0.0)) {
        throw Error(ErrorCode::kInvalidInput, "noise levels must be non-negative");
    }
}

double ScaledBesselK1(double z) {
    if (!std::isfinite(z) || z < 0.0) {
        throw Error(ErrorCode::kInvalidInput, "Bessel argument must be finite and non-negative");
    }
    if (z == 0.0) return 1.0;
    if (z < 1e-6) {
        // z K1(z) = 1 + (z^2 / 2) (ln(z / 2) + gamma - 1/2) + O(z^4 ln z)
        constexpr double kEulerGamma = 0.57721566490153286061;
        return 1.0 + 0.5 * z * z * (std::log(0.5 * z) + kEulerGamma - 0.5);
    }
    if (z > 30.0) {
        // Hankel expansion with mu = 4 nu^2 = 4.
        const double inv = 1.0 / (8.0 * z);
        const double series = 1.0 + 3.0 * inv - 7.5 * inv * inv + 52.5 * inv * inv * inv -
                              590.625 * inv * inv * inv * inv;
        return std::sqrt(0.5 * M_PI * z) * std::exp(-z) * series;
    }
    return z * std::cyl_bessel_k(1.0, z);
}

double WhittleCov(double r, const KernelParams &params) {
    if (!std::isfinite(r) || r < 0.0) {
        throw Error(ErrorCode::kInvalidInput, "lag must be finite and non-negative");
    }
    return params.sigma2 * ScaledBesselK1(params.lambda * r);
}

double MaternCov(double r, const KernelParams &params) {
    if (!std::isfinite(r) || r < 0.0) {
        throw Error(ErrorCode::kInvalidInput, "lag must be finite and non-negative");
    }
    if (params.kind == KernelKind::kWhittle) return WhittleCov(r, params);
    const double z = params.lambda * r;
    return params.sigma2 * (1.0 + z) * std::exp(-z);
}

namespace detail {

void JointBlock(const double *x, const double *xp, int dim, const KernelParams &params,
                Eigen::Ref<Matrix> out) {
    const double lambda = params.lambda;
    double d[3];
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) {
        d[i] = x[i] - xp[i];
        r2 += d[i] * d[i];
    }
    const double r = std::sqrt(r2);
    const double e = std::exp(-lambda * r);
    const double b = params.sigma2 * lambda * lambda * e;
    out(0, 0) = params.sigma2 * (1.0 + lambda * r) * e;
    for (int i = 0; i < dim; ++i) {
        out(1 + i, 0) = -b * d[i];
        out(0, 1 + i) = b * d[i];
    }
    // The radial term d_i d_j / r vanishes continuously as r -> 0.
    const double c = r > 0.0 ? lambda / r : 0.0;
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            out(1 + i, 1 + j) = b * ((i == j ? 1.0 : 0.0) - c * d[i] * d[j]);
        }
    }
}

}  // namespace detail

KernelEval EvaluateKernel(const Eigen::Ref<const Vector> &x, const Eigen::Ref<const Vector> &xp,
                          const KernelParams &params) {
    if (x.size() != xp.size() || !IsSupportedDim(x.size())) {
        throw Error(ErrorCode::kDimensionMismatch, "kernel arguments must share D in {2, 3}");
    }
    if (!params.SupportsGradients()) {
        throw Error(ErrorCode::kUnsupportedKernel,
                    "Whittle kernel is not differentiable; derivative blocks need matern32");
    }
    const int dim = static_cast<int>(x.size());
    Matrix block(dim + 1, dim + 1);
    detail::JointBlock(x.data(), xp.data(), dim, params, block);
    KernelEval eval;
    eval.value = block(0, 0);
    eval.grad_x = block.col(0).tail(dim);
    eval.grad_xp = block.row(0).tail(dim).transpose();
    eval.hess = block.bottomRightCorner(dim, dim);
    return eval;
}

Matrix JointCovMatrix(const Eigen::Ref<const Points> &x, const Eigen::Ref<const Points> &xp,
                      const KernelParams &params, bool with_gradients) {
    if (x.cols() != xp.cols() || !IsSupportedDim(x.cols())) {
        throw Error(ErrorCode::kDimensionMismatch, "point sets must share D in {2, 3}");
    }
    const int dim = static_cast<int>(x.cols());
    const Eigen::Index n = x.rows();
    const Eigen::Index m = xp.rows();
    if (!with_gradients) {
        Matrix k(n, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                k(i, j) = MaternCov((x.row(i) - xp.row(j)).norm(), params);
            }
        }
        return k;
    }
    if (!params.SupportsGradients()) {
        throw Error(ErrorCode::kUnsupportedKernel, "gradient blocks need matern32");
    }
    const Eigen::Index stride = dim + 1;
    Matrix k(n * stride, m * stride);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            detail::JointBlock(x.row(i).data(), xp.row(j).data(), dim, params,
                               k.block(i * stride, j * stride, stride, stride));
        }
    }
    return k;
}

}  // namespace loggpis
