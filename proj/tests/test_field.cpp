#include <doctest.h>

#include <random>

#include "loggpis/field.hpp"
#include "loggpis/gp.hpp"
#include "loggpis/map.hpp"

using namespace loggpis;

namespace {

KernelParams Lambda(double lambda) {
    KernelParams p;
    p.lambda = lambda;
    return p;
}

// Sample variance of -ln(f) / lambda for f ~ N(mean, var).
double MonteCarloDistanceVar(double mean, double var, double lambda, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(mean, std::sqrt(var));
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = -std::log(g(rng)) / lambda;
        s += d;
        s2 += d * d;
    }
    const double m = s / n;
    return (s2 - n * m * m) / (n - 1);
}

}  // namespace

TEST_CASE("distance transform") {
    CHECK(ToDistance(1.0, Lambda(40.0)).distance == 0.0);
    CHECK_FALSE(ToDistance(1.0, Lambda(40.0)).clamped);
    CHECK(ToDistance(std::exp(-20.0), Lambda(40.0)).distance == doctest::Approx(0.5).epsilon(1e-14));
    const DistanceResult neg = ToDistance(-0.001, Lambda(40.0));
    CHECK(neg.clamped);
    CHECK(neg.distance == doctest::Approx(0.690775527898).epsilon(1e-10));
    const DistanceResult over = ToDistance(1.3, Lambda(40.0));
    CHECK(over.clamped);
    CHECK(over.distance == 0.0);
    FieldOptions deep;
    deep.latent_floor = 1e-300;
    CHECK(ToDistance(1e-200, Lambda(40.0), deep).distance == doctest::Approx(200 * std::log(10.0) / 40.0));
}

TEST_CASE("distance round trip") {
    for (double lambda : {1.0, 5.0, 40.0, 300.0}) {
        const double top = 0.5 * -std::log(1e-12) / lambda;
        for (int i = 0; i <= 1000; ++i) {
            const double d = top * i / 1000.0;
            const DistanceResult r = ToDistance(std::exp(-lambda * d), Lambda(lambda));
            CHECK(std::abs(r.distance - d) <= 1e-12);
            CHECK_FALSE(r.clamped);
        }
    }
}

TEST_CASE("gradient transform") {
    Vector g(2);
    g << 0.0, -3.0;
    const auto unit = ToGradient(0.5, g);
    REQUIRE(unit);
    CHECK((*unit)(0) == 0.0);
    CHECK((*unit)(1) == doctest::Approx(1.0));
    Vector tiny(2);
    tiny << 1e-15, 0.0;
    CHECK_FALSE(ToGradient(1.0, tiny));
    // Far-field latent values are tiny but their gradients still point.
    Vector far(2);
    far << 3e-20, -4e-20;
    const auto dir = ToGradient(1e-19, far);
    REQUIRE(dir);
    CHECK((*dir)(0) == doctest::Approx(-0.6));
}

TEST_CASE("variance transform") {
    CHECK(ToVariance(0.7, 0.0, Lambda(40.0)) == 0.0);
    CHECK(ToVariance(1.0, 0.04, Lambda(40.0)) == doctest::Approx(2.5e-5));
    // Clamped latent means use the floor.
    CHECK(ToVariance(-1.0, 1.0, Lambda(1.0)) == doctest::Approx(1e24));
}

TEST_CASE("variance transform matches Monte Carlo") {
    int seed = 1;
    for (double lambda : {5.0, 40.0}) {
        for (double mean : {0.9, 0.2, 0.01}) {
            for (double rel : {0.02, 0.05, 0.09}) {
                const double var = (rel * mean) * (rel * mean);
                const double mc = MonteCarloDistanceVar(mean, var, lambda, seed++);
                CHECK(ToVariance(mean, var, Lambda(lambda)) == doctest::Approx(mc).epsilon(0.2));
            }
        }
    }
}

TEST_CASE("variance transform matches Monte Carlo of a fitted posterior") {
    // A patch of samples; queries on and between them.
    TrainingBlock b;
    b.positions = Points::Zero(25, 2);
    for (int i = 0; i < 25; ++i) {
        b.positions(i, 0) = 0.05 * (i % 5 - 2);
        b.positions(i, 1) = 0.05 * (i / 5 - 2);
    }
    b.values = Vector::Ones(25);
    b.noise = Vector::Constant(25, 0.01);
    KernelParams p = Lambda(3.0);
    p.kind = KernelKind::kWhittle;
    p.noise_y = 0.0;
    const GpModel m = GpModel::Fit(b, p);
    int checked = 0;
    for (double y : {0.0, 0.012, 0.025}) {
        Vector q(2);
        q << 0.025, y;
        const LatentPrediction pred = m.Predict(q);
        if (std::sqrt(pred.var) >= 0.1 * pred.mean) continue;
        ++checked;
        const double mc = MonteCarloDistanceVar(pred.mean, pred.var, p.lambda, 77 + checked);
        CHECK(ToVariance(pred.mean, pred.var, p) == doctest::Approx(mc).epsilon(0.2));
    }
    CHECK(checked >= 2);
}

TEST_CASE("sign recovery") {
    Vector q(2), s(2), g(2);
    q << 0.0, 0.0;
    s << 2.0, 0.0;
    g << 1.0, 0.0;
    CHECK(RecoverSign(q, g, s) == Sign::kPositive);
    CHECK(RecoverSign(q, -g, s) == Sign::kNegative);
    g << 0.0, 1.0;
    CHECK(RecoverSign(q, g, s) == Sign::kUnknown);
    // Inside a unit circle: the distance gradient points away from the
    // nearest boundary point, i.e. toward the centre.
    q << 0.5, 0.0;
    s << 3.0, 0.0;
    g << -1.0, 0.0;
    CHECK(RecoverSign(q, g, s) == Sign::kNegative);
}

TEST_CASE("estimates from latent predictions") {
    LatentPrediction lp;
    lp.mean = std::exp(-40.0 * 0.2);
    lp.var = 1e-6;
    lp.grad_mean = Vector(2);
    lp.grad_mean << -40.0 * lp.mean, 0.0;
    const FieldEstimate e = MakeLogEstimate(lp, Lambda(40.0));
    CHECK(e.distance == doctest::Approx(0.2));
    CHECK(e.gradient_defined);
    CHECK(e.gradient(0) == doctest::Approx(1.0));
    CHECK(e.variance == doctest::Approx(1e-6 / std::pow(40.0 * lp.mean, 2)));
    CHECK(e.latent_mean == lp.mean);
    const FieldEstimate raw = MakeRawEstimate(lp);
    CHECK(raw.distance == doctest::Approx(std::abs(lp.mean)));
}
