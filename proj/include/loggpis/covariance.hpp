#pragma once

#include <string>
#include <string_view>

#include "loggpis/types.hpp"

namespace loggpis {

/// Member of the Matérn family in use. Whittle is the nu = 1 member and is
/// not differentiable in the mean-square sense, so it only supports value
/// observations. Matérn 3/2 is rescaled so its exponent is -lambda * r.
enum class KernelKind { kWhittle, kMatern32 };

std::string_view ToString(KernelKind kind);
KernelKind KernelKindFromString(std::string_view name);

struct KernelParams {
    double lambda = 40.0;  // inverse length, 1/m
    KernelKind kind = KernelKind::kMatern32;
    double sigma2 = 1.0;
    double noise_y = 1e-2;
    double noise_grad = 1e-2;

    [[nodiscard]] double nu() const { return kind == KernelKind::kWhittle ? 1.0 : 1.5; }
    [[nodiscard]] bool SupportsGradients() const { return kind == KernelKind::kMatern32; }

    /// Throws kInvalidInput when a field is out of range.
    void Validate() const;
};

/// z * K1(z), the Whittle profile normalised so that it tends to 1 as z -> 0.
double ScaledBesselK1(double z);

/// Matérn covariance at lag r with the length rescaled so the Bessel argument
/// is lambda * r. Both members are normalised to sigma2 at r = 0.
double MaternCov(double r, const KernelParams &params);

/// The nu = 1 member: sigma2 * (lambda r) * K1(lambda r).
double WhittleCov(double r, const KernelParams &params);

struct KernelEval {
    double value = 0.0;
    Vector grad_x;   // d k / d x
    Vector grad_xp;  // d k / d x'
    Matrix hess;     // d^2 k / (d x d x'^T)
};

/// Value and derivative blocks of the Matérn 3/2 kernel. Throws
/// kUnsupportedKernel for Whittle, which has no derivative blocks.
KernelEval EvaluateKernel(const Eigen::Ref<const Vector> &x, const Eigen::Ref<const Vector> &xp,
                          const KernelParams &params);

/// Joint covariance between two point sets. With gradients, each point
/// contributes the (1 + D) rows [f, df/dx_1, ..., df/dx_D], so the result is
/// N(1+D) x M(1+D). Without gradients it is the plain N x M Gram matrix.
Matrix JointCovMatrix(const Eigen::Ref<const Points> &x, const Eigen::Ref<const Points> &xp,
                      const KernelParams &params, bool with_gradients);

namespace detail {

/// Writes the (1+D) x (1+D) joint block between two points into `out`.
/// Matérn 3/2 only; the hot path of assembly and prediction.
void JointBlock(const double *x, const double *xp, int dim, const KernelParams &params,
                Eigen::Ref<Matrix> out);

}  // namespace detail

}  // namespace loggpis
