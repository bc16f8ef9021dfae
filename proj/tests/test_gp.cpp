#include <doctest.h>

#include <random>

#include "loggpis/error.hpp"
#include "loggpis/gp.hpp"
#include "oracles.hpp"

using namespace loggpis;

namespace {

struct Instance {
    TrainingBlock block;
    KernelParams params;
};

Instance RandomInstance(std::mt19937_64 &rng, int n, int dim) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Instance inst;
    inst.params.lambda = 1.0 + 4.0 * std::abs(u(rng));
    inst.params.sigma2 = 0.5 + std::abs(u(rng));
    inst.params.noise_y = 0.05;
    inst.params.noise_grad = 0.1;
    inst.block.positions.resize(n, dim);
    inst.block.values.resize(n);
    inst.block.grad_targets.resize(n, dim);
    inst.block.noise.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < dim; ++a) {
            inst.block.positions(i, a) = u(rng);
            inst.block.grad_targets(i, a) = u(rng);
        }
        inst.block.values(i) = u(rng);
        inst.block.noise(i) = 0.05 + 0.1 * std::abs(u(rng));
    }
    return inst;
}

}  // namespace

TEST_CASE("scalar fit") {
    TrainingBlock b;
    b.positions.resize(1, 2);
    b.positions << 0.2, 0.1;
    b.values = Vector::Ones(1);
    b.noise = Vector::Constant(1, 0.3);
    KernelParams p;
    p.kind = KernelKind::kWhittle;
    p.sigma2 = 2.0;
    const GpModel m = GpModel::Fit(b, p);
    CHECK(m.alpha()(0) == doctest::Approx(1.0 / (2.0 + 0.09)));
}

TEST_CASE("predictions match a dense LU oracle") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = trial % 2 == 0 ? 2 : 3;
        const int n = 1 + trial % 6;
        const Instance inst = RandomInstance(rng, n, dim);
        const GpModel m = GpModel::Fit(inst.block, inst.params);
        Vector q(dim);
        for (int a = 0; a < dim; ++a) q(a) = u(rng);
        const LatentPrediction pred = m.Predict(q);
        const oracle::DenseResult ref =
            oracle::DenseGp(inst.block.positions, inst.block.values, inst.block.grad_targets, inst.block.noise,
                            inst.params.noise_grad, inst.params.lambda, inst.params.sigma2, q);
        CHECK(m.jitter() == 0.0);
        CHECK(std::abs(pred.mean - ref.mean) < 1e-10);
        CHECK((pred.grad_mean - ref.grad).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(pred.var - ref.var) < 1e-10);
    }
}

TEST_CASE("factor reproduces the targets") {
    std::mt19937_64 rng(3);
    const Instance inst = RandomInstance(rng, 5, 3);
    const GpModel m = GpModel::Fit(inst.block, inst.params);
    const Vector back = m.factor() * (m.factor().transpose() * m.alpha());
    CHECK((back - m.StackedTargets()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((m.Covariance() * m.alpha() - m.StackedTargets()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("collinear points with gradients need at most small jitter") {
    TrainingBlock b;
    b.positions.resize(5, 2);
    b.grad_targets.resize(5, 2);
    for (int i = 0; i < 5; ++i) {
        b.positions.row(i) << 0.01 * i, 0.0;
        b.grad_targets.row(i) << 0.0, -1.0;
    }
    b.values = Vector::Ones(5);
    b.noise = Vector::Zero(5);
    KernelParams p;
    p.lambda = 1.0;
    p.noise_y = 0.0;
    p.noise_grad = 0.0;
    const GpModel m = GpModel::Fit(b, p);
    CHECK(m.jitter() <= 1e-6 * p.sigma2);
}

TEST_CASE("duplicate noiseless points report ill conditioning or absorb jitter") {
    TrainingBlock b;
    b.positions = Points::Zero(3, 2);
    b.values = Vector::Ones(3);
    b.noise = Vector::Zero(3);
    KernelParams p;
    p.kind = KernelKind::kWhittle;
    p.noise_y = 0.0;
    const GpModel m = GpModel::Fit(b, p);
    CHECK(m.jitter() > 0.0);
    CHECK(m.jitter() <= 1e-6 * p.sigma2);
}

TEST_CASE("interpolation and prior reversion") {
    TrainingBlock b;
    b.positions.resize(3, 2);
    b.positions << 0.0, 0.0, 0.5, 0.0, 0.0, 0.4;
    b.values = Vector(3);
    b.values << 0.3, -0.2, 0.9;
    b.noise = Vector::Constant(3, 1e-7);
    KernelParams p;
    p.kind = KernelKind::kWhittle;
    p.lambda = 3.0;
    p.noise_y = 0.0;
    const GpModel m = GpModel::Fit(b, p);
    for (int i = 0; i < 3; ++i) {
        CHECK(m.Predict(b.positions.row(i).transpose()).mean == doctest::Approx(b.values(i)).epsilon(1e-6));
    }
    Vector far(2);
    far << 40.0, 0.0;  // lambda * dist > 50
    const LatentPrediction pf = m.Predict(far);
    CHECK(std::abs(pf.mean) < 1e-20);
    CHECK(pf.var == doctest::Approx(p.sigma2));
}

TEST_CASE("variance stays within the prior") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const Instance inst = RandomInstance(rng, 6, 2);
    const GpModel m = GpModel::Fit(inst.block, inst.params);
    for (int i = 0; i < 500; ++i) {
        Vector q(2);
        q << u(rng), u(rng);
        const LatentPrediction p = m.Predict(q);
        CHECK(p.var >= 0.0);
        CHECK(p.var <= inst.params.sigma2 * (1.0 + 1e-8));
        REQUIRE(p.grad_var.rows() == 2);
        CHECK(p.grad_var.diagonal().minCoeff() >= 0.0);
    }
}

TEST_CASE("batch prediction equals looped prediction") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Instance inst = RandomInstance(rng, 6, 3);
    const GpModel m = GpModel::Fit(inst.block, inst.params);
    Points q(100, 3);
    for (Eigen::Index i = 0; i < 100; ++i) q.row(i) << u(rng), u(rng), u(rng);
    const auto batch = m.PredictBatch(q);
    REQUIRE(batch.size() == 100);
    for (Eigen::Index i = 0; i < 100; ++i) {
        const LatentPrediction one = m.Predict(q.row(i).transpose());
        CHECK(batch[static_cast<std::size_t>(i)].mean == one.mean);
        CHECK(batch[static_cast<std::size_t>(i)].var == one.var);
        CHECK(batch[static_cast<std::size_t>(i)].grad_mean == one.grad_mean);
    }
    CHECK(m.PredictBatch(Points(0, 3)).empty());
}

TEST_CASE("partial mean over all rows equals the full mean") {
    std::mt19937_64 rng(6);
    const Instance inst = RandomInstance(rng, 5, 2);
    const GpModel m = GpModel::Fit(inst.block, inst.params);
    Vector q(2);
    q << 0.1, -0.3;
    double mean = 0.0;
    Vector grad = Vector::Zero(2);
    m.AccumulatePartialMean(q, {0, 1, 2}, mean, grad);
    m.AccumulatePartialMean(q, {3, 4}, mean, grad);
    const LatentPrediction p = m.Predict(q);
    CHECK(mean == doctest::Approx(p.mean).epsilon(1e-12));
    CHECK((grad - p.grad_mean).norm() < 1e-12);
}

TEST_CASE("fit errors") {
    TrainingBlock b;
    b.positions.resize(2, 2);
    b.positions << 0, 0, 1, 1;
    b.values = Vector::Ones(2);
    b.noise = Vector::Constant(2, 0.1);
    b.grad_targets = Points::Zero(2, 2);
    KernelParams whittle;
    whittle.kind = KernelKind::kWhittle;
    CHECK_THROWS_AS(GpModel::Fit(b, whittle), Error);
    TrainingBlock empty;
    empty.positions.resize(0, 2);
    CHECK_THROWS_AS(GpModel::Fit(empty, KernelParams{}), Error);
    const GpModel m = GpModel::Fit(b, KernelParams{});
    CHECK_THROWS_AS((void)m.Predict(Vector::Zero(3)), Error);
}
