#pragma once

#include <optional>

#include "loggpis/covariance.hpp"
#include "loggpis/gp.hpp"
#include "loggpis/types.hpp"

namespace loggpis {

enum class Sign { kNegative = -1, kUnknown = 0, kPositive = 1 };

struct FieldOptions {
    /// Smallest latent mean passed to the logarithm. Distances saturate at
    /// -ln(latent_floor) / lambda; 1e-12 caps lambda = 40 at about 0.69 m.
    double latent_floor = 1e-12;
};

/// Per-query output of the log-transformed field.
struct FieldEstimate {
    double latent_mean = 0.0;
    double distance = 0.0;
    Vector gradient;  // unit; meaningful only when gradient_defined
    bool gradient_defined = false;
    double variance = 0.0;
    Sign sign = Sign::kUnknown;
    bool clamped = false;

    [[nodiscard]] double SignedDistance() const {
        return sign == Sign::kNegative ? -distance : distance;
    }
};

struct DistanceResult {
    double distance = 0.0;
    bool clamped = false;
};

/// -ln(f) / lambda, saturating below the latent floor and at zero above one.
DistanceResult ToDistance(double latent_mean, const KernelParams &params,
                          const FieldOptions &options = {});

/// Unit distance gradient: the latent gradient normalised and flipped. Returns
/// nullopt where |grad f| <= 1e-12 |f| (medial axis or no signal).
std::optional<Vector> ToGradient(double latent_mean, const Eigen::Ref<const Vector> &latent_grad);

/// First-order propagation of the latent variance through the logarithm.
double ToVariance(double latent_mean, double latent_var, const KernelParams &params,
                  const FieldOptions &options = {});

/// +1 when the gradient points toward the sensor (query in free space), -1
/// when it points away; unknown when the two are within 1e-9 of orthogonal.
Sign RecoverSign(const Eigen::Ref<const Vector> &query, const Eigen::Ref<const Vector> &gradient,
                 const Eigen::Ref<const Vector> &sensor_pos);

/// Applies all transforms to a latent prediction.
FieldEstimate MakeLogEstimate(const LatentPrediction &latent, const KernelParams &params,
                              const FieldOptions &options = {});

/// Standard GPIS reading of a latent prediction: the mean is a signed
/// distance, split into its magnitude and sign.
FieldEstimate MakeRawEstimate(const LatentPrediction &latent);

}  // namespace loggpis
