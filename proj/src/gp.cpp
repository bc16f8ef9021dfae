#include "loggpis/gp.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "loggpis/error.hpp"

namespace loggpis {

void TrainingBlock::Validate() const {
    const Eigen::Index n = positions.rows();
    if (n < 1) throw Error(ErrorCode::kInvalidInput, "training block needs at least one point");
    if (!IsSupportedDim(positions.cols())) {
        throw Error(ErrorCode::kDimensionMismatch, "training positions must have D in {2, 3}");
    }
    if (values.size() != n || noise.size() != n) {
        throw Error(ErrorCode::kDimensionMismatch, "values and noise must have one entry per point");
    }
    if (HasGradients() && (grad_targets.rows() != n || grad_targets.cols() != positions.cols())) {
        throw Error(ErrorCode::kDimensionMismatch, "gradient targets must be N x D");
    }
    if (!positions.allFinite() || !values.allFinite() || !grad_targets.allFinite()) {
        throw Error(ErrorCode::kInvalidInput, "training data must be finite");
    }
    if ((noise.array() < 0.0).any() || !noise.allFinite()) {
        throw Error(ErrorCode::kInvalidInput, "noise must be finite and non-negative");
    }
}

Vector GpModel::StackedTargets() const {
    const Eigen::Index n = training_.size();
    if (!with_gradients()) return training_.values;
    const int dim = training_.dim();
    Vector y(n * (dim + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i * (dim + 1)) = training_.values(i);
        for (int j = 0; j < dim; ++j) y(i * (dim + 1) + 1 + j) = training_.grad_targets(i, j);
    }
    return y;
}

namespace {

Matrix NoisyCovariance(const TrainingBlock &training, const KernelParams &params) {
    const bool grads = training.HasGradients();
    Matrix k = JointCovMatrix(training.positions, training.positions, params, grads);
    const int stride = grads ? training.dim() + 1 : 1;
    const double grad_var = params.noise_grad * params.noise_grad;
    for (Eigen::Index i = 0; i < training.size(); ++i) {
        k(i * stride, i * stride) += training.noise(i) * training.noise(i);
        for (int j = 1; j < stride; ++j) k(i * stride + j, i * stride + j) += grad_var;
    }
    return k;
}

}  // namespace

Matrix GpModel::Covariance() const {
    Matrix k = NoisyCovariance(training_, params_);
    k.diagonal().array() += jitter_;
    return k;
}

GpModel GpModel::Fit(TrainingBlock training, const KernelParams &params) {
    params.Validate();
    training.Validate();
    if (training.HasGradients() && !params.SupportsGradients()) {
        throw Error(ErrorCode::kUnsupportedKernel,
                    "gradient observations need a differentiable kernel (matern32)");
    }

    GpModel model;
    model.params_ = params;
    model.training_ = std::move(training);
    const Matrix k = NoisyCovariance(model.training_, params);

    Eigen::LLT<Matrix> llt;
    double jitter = 0.0;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        jitter = attempt == 0 ? 0.0 : params.sigma2 * std::pow(10.0, -11 + attempt);
        if (jitter == 0.0) {
            llt.compute(k);
        } else {
            Matrix kj = k;
            kj.diagonal().array() += jitter;
            llt.compute(kj);
        }
        if (llt.info() == Eigen::Success) break;
        if (attempt == 5) {
            Eigen::SelfAdjointEigenSolver<Matrix> eig(k, Eigen::EigenvaluesOnly);
            const Vector &ev = eig.eigenvalues();
            std::ostringstream msg;
            msg << "Cholesky failed with jitter up to " << jitter << "; condition estimate "
                << std::abs(ev.maxCoeff()) / std::max(std::abs(ev.minCoeff()), 1e-300)
                << " (min eigenvalue " << ev.minCoeff() << ")";
            throw Error(ErrorCode::kIllConditioned, msg.str());
        }
    }
    if (jitter > 0.0) {
        spdlog::debug("GP fit with N={} needed jitter {:.1e}", model.training_.size(), jitter);
    }
    model.jitter_ = jitter;
    model.factor_ = llt.matrixL();
    model.alpha_ = llt.solve(model.StackedTargets());
    return model;
}

LatentPrediction GpModel::Predict(const Eigen::Ref<const Vector> &x,
                                  const PredictOptions &options) const {
    const int dim = training_.dim();
    if (x.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "query dimension mismatch");
    const Eigen::Index n = training_.size();
    const bool grads = with_gradients() || params_.SupportsGradients();
    const int out_rows = grads ? dim + 1 : 1;
    const int stride = with_gradients() ? dim + 1 : 1;

    // Cross-covariance between the query outputs [f, grad f] and the training
    // observations.
    Matrix ks(out_rows, n * stride);
    if (with_gradients()) {
        for (Eigen::Index i = 0; i < n; ++i) {
            detail::JointBlock(x.data(), &training_.positions(i, 0), dim, params_,
                               ks.block(0, i * stride, out_rows, stride));
        }
    } else if (grads) {
        Matrix block(dim + 1, dim + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            detail::JointBlock(x.data(), &training_.positions(i, 0), dim, params_, block);
            ks.col(i) = block.col(0);
        }
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = (x.transpose() - training_.positions.row(i)).norm();
            ks(0, i) = MaternCov(r, params_);
        }
    }

    LatentPrediction out;
    const Vector mean = ks * alpha_;
    out.mean = mean(0);
    if (grads) out.grad_mean = mean.tail(dim);

    const auto lower = factor_.triangularView<Eigen::Lower>();
    const bool want_grad_var = grads && options.gradient_variance;
    if (want_grad_var) {
        const Matrix v = lower.solve(ks.transpose());
        Matrix cov = -v.transpose() * v;
        cov(0, 0) += params_.sigma2;
        const double prior_grad = params_.sigma2 * params_.lambda * params_.lambda;
        for (int j = 1; j <= dim; ++j) cov(j, j) += prior_grad;
        out.var = cov(0, 0);
        out.grad_var = cov.bottomRightCorner(dim, dim);
    } else {
        const Vector v = lower.solve(ks.row(0).transpose());
        out.var = params_.sigma2 - v.squaredNorm();
    }
    if (out.var < 0.0) {
        out.var = 0.0;
        out.var_clamped = true;
    }
    return out;
}

void GpModel::AccumulatePartialMean(const Eigen::Ref<const Vector> &x, const std::vector<int> &rows,
                                    double &mean, Eigen::Ref<Vector> grad) const {
    const int dim = training_.dim();
    const bool grads = params_.SupportsGradients();
    if (x.size() != dim || (grads && grad.size() != dim)) {
        throw Error(ErrorCode::kDimensionMismatch, "query dimension mismatch");
    }
    Matrix block(dim + 1, dim + 1);
    for (int i : rows) {
        if (!grads) {
            const double r = (x.transpose() - training_.positions.row(i)).norm();
            mean += MaternCov(r, params_) * alpha_(i);
            continue;
        }
        detail::JointBlock(x.data(), &training_.positions(i, 0), dim, params_, block);
        if (with_gradients()) {
            const auto a = alpha_.segment(static_cast<Eigen::Index>(i) * (dim + 1), dim + 1);
            mean += block.row(0).dot(a);
            grad += block.bottomRows(dim) * a;
        } else {
            mean += block(0, 0) * alpha_(i);
            grad += block.col(0).tail(dim) * alpha_(i);
        }
    }
}

std::vector<LatentPrediction> GpModel::PredictBatch(const Eigen::Ref<const Points> &queries,
                                                    const PredictOptions &options) const {
    if (queries.rows() > 0 && queries.cols() != training_.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "query dimension mismatch");
    }
    const Eigen::Index m = queries.rows();
    std::vector<LatentPrediction> out(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vector q = queries.row(i).transpose();
        out[static_cast<std::size_t>(i)] = Predict(q, options);
    }
    return out;
}

}  // namespace loggpis
