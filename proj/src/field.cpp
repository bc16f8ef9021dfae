#include "loggpis/field.hpp"

#include <algorithm>
#include <cmath>

namespace loggpis {

DistanceResult ToDistance(double latent_mean, const KernelParams &params,
                          const FieldOptions &options) {
    const double floor = options.latent_floor;
    if (!(latent_mean > floor)) {  // also catches NaN
        return {-std::log(floor) / params.lambda, true};
    }
    if (latent_mean > 1.0) return {0.0, true};
    // -ln(1) would give -0.0
    return {std::max(0.0, -std::log(latent_mean) / params.lambda), false};
}

std::optional<Vector> ToGradient(double latent_mean, const Eigen::Ref<const Vector> &latent_grad) {
    const double norm = latent_grad.norm();
    if (!std::isfinite(norm) || norm == 0.0 || norm <= 1e-12 * std::abs(latent_mean)) {
        return std::nullopt;
    }
    return Vector(-latent_grad / norm);
}

double ToVariance(double latent_mean, double latent_var, const KernelParams &params,
                  const FieldOptions &options) {
    const double f = std::max(latent_mean, options.latent_floor);
    const double scale = params.lambda * f;
    return std::max(latent_var, 0.0) / (scale * scale);
}

Sign RecoverSign(const Eigen::Ref<const Vector> &query, const Eigen::Ref<const Vector> &gradient,
                 const Eigen::Ref<const Vector> &sensor_pos) {
    const double dot = gradient.dot(sensor_pos - query);
    if (std::abs(dot) <= 1e-9) return Sign::kUnknown;
    return dot > 0.0 ? Sign::kPositive : Sign::kNegative;
}

FieldEstimate MakeLogEstimate(const LatentPrediction &latent, const KernelParams &params,
                              const FieldOptions &options) {
    FieldEstimate est;
    est.latent_mean = latent.mean;
    const DistanceResult d = ToDistance(latent.mean, params, options);
    est.distance = d.distance;
    est.clamped = d.clamped;
    if (latent.grad_mean.size() > 0) {
        if (auto g = ToGradient(latent.mean, latent.grad_mean)) {
            est.gradient = std::move(*g);
            est.gradient_defined = true;
        }
    }
    if (!est.gradient_defined) est.gradient = Vector::Zero(latent.grad_mean.size());
    est.variance = ToVariance(latent.mean, latent.var, params, options);
    return est;
}

FieldEstimate MakeRawEstimate(const LatentPrediction &latent) {
    FieldEstimate est;
    est.latent_mean = latent.mean;
    est.distance = std::abs(latent.mean);
    est.variance = latent.var;
    est.sign = latent.mean > 0.0 ? Sign::kPositive
                                 : (latent.mean < 0.0 ? Sign::kNegative : Sign::kUnknown);
    const double norm = latent.grad_mean.norm();
    if (latent.grad_mean.size() > 0 && norm > 1e-12) {
        // gradient of the unsigned distance |mean|
        const double s = latent.mean < 0.0 ? -1.0 : 1.0;
        est.gradient = s * latent.grad_mean / norm;
        est.gradient_defined = true;
    } else {
        est.gradient = Vector::Zero(latent.grad_mean.size());
    }
    return est;
}

}  // namespace loggpis
