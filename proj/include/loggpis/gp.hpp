#pragma once

#include <vector>

#include "loggpis/covariance.hpp"
#include "loggpis/types.hpp"

namespace loggpis {

/// Observations for one GP. `grad_targets` is empty (0 rows) for value-only
/// regression; otherwise it holds one gradient observation per point, each
/// with noise std `KernelParams::noise_grad`.
struct TrainingBlock {
    Points positions;
    Vector values;
    Points grad_targets;
    Vector noise;  // per-point value-observation std

    [[nodiscard]] Eigen::Index size() const { return positions.rows(); }
    [[nodiscard]] int dim() const { return static_cast<int>(positions.cols()); }
    [[nodiscard]] bool HasGradients() const { return grad_targets.rows() > 0; }
    void Validate() const;
};

struct PredictOptions {
    bool gradient_variance = true;
};

/// Latent posterior at one query.
struct LatentPrediction {
    double mean = 0.0;
    Vector grad_mean;  // empty for value-only models
    double var = 0.0;
    Matrix grad_var;   // D x D; empty unless requested and available
    bool var_clamped = false;
};

class GpModel {
public:
    /// Factorises (K + Sigma) with jitter escalation 0, 1e-10 sigma2, ...,
    /// 1e-6 sigma2. Throws kIllConditioned with a condition estimate when even
    /// the largest jitter fails.
    static GpModel Fit(TrainingBlock training, const KernelParams &params);

    [[nodiscard]] LatentPrediction Predict(const Eigen::Ref<const Vector> &x,
                                           const PredictOptions &options = {}) const;

    /// Mean and gradient restricted to the terms of the listed training rows,
    /// sum_j k(x, x_j) alpha_j. Over all rows this equals the full mean.
    void AccumulatePartialMean(const Eigen::Ref<const Vector> &x, const std::vector<int> &rows,
                               double &mean, Eigen::Ref<Vector> grad) const;

    /// Same result as looping Predict; queries run in parallel over OpenMP.
    [[nodiscard]] std::vector<LatentPrediction> PredictBatch(
        const Eigen::Ref<const Points> &queries, const PredictOptions &options = {}) const;

    [[nodiscard]] const TrainingBlock &training() const { return training_; }
    [[nodiscard]] const KernelParams &params() const { return params_; }
    [[nodiscard]] const Matrix &factor() const { return factor_; }
    [[nodiscard]] const Vector &alpha() const { return alpha_; }
    [[nodiscard]] double jitter() const { return jitter_; }
    [[nodiscard]] bool with_gradients() const { return training_.HasGradients(); }

    /// The stacked target vector [y_1, grad y_1, ..., y_N, grad y_N].
    [[nodiscard]] Vector StackedTargets() const;
    /// K + Sigma + jitter I, rebuilt on demand.
    [[nodiscard]] Matrix Covariance() const;

private:
    GpModel() = default;

    TrainingBlock training_;
    KernelParams params_;
    Matrix factor_;  // lower triangular
    Vector alpha_;
    double jitter_ = 0.0;
};

}  // namespace loggpis
