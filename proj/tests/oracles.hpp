#pragma once

// Reference computations written independently of the library code paths.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Matern-3/2 with Bessel argument lambda * r.
inline double Matern32(double r, double lambda, double sigma2) {
    return sigma2 * (1.0 + lambda * r) * std::exp(-lambda * r);
}

// K1(z) = int_0^inf exp(-z cosh t) cosh t dt, trapezoid rule.
inline double BesselK1Quadrature(double z) {
    const double h = 1e-4;
    double sum = 0.5 * std::exp(-z);
    for (int i = 1;; ++i) {
        const double t = i * h;
        const double term = std::exp(-z * std::cosh(t)) * std::cosh(t);
        sum += term;
        if (term < 1e-300 || (t > 1.0 && term < 1e-18 * sum)) break;
    }
    return sum * h;
}

// Covariance between [f(a), df/da_1..D] and [f(b), df/db_1..D] for the
// Matern-3/2 kernel, from the derivatives of s(r) = (1 + l r) e^{-l r}:
//   dk/da_i       = -sigma2 l^2 e^{-l r} (a - b)_i
//   d2k/da_i db_j =  sigma2 l^2 e^{-l r} (delta_ij - l (a-b)_i (a-b)_j / r)
inline Eigen::MatrixXd JointMatern(const Eigen::VectorXd &a, const Eigen::VectorXd &b, double l,
                                   double sigma2) {
    const int d = static_cast<int>(a.size());
    const Eigen::VectorXd diff = a - b;
    const double r = diff.norm();
    const double e = std::exp(-l * r);
    Eigen::MatrixXd k(d + 1, d + 1);
    k(0, 0) = sigma2 * (1.0 + l * r) * e;
    for (int i = 0; i < d; ++i) {
        k(1 + i, 0) = -sigma2 * l * l * e * diff(i);  // cov(df/da_i, f(b))
        k(0, 1 + i) = sigma2 * l * l * e * diff(i);   // cov(f(a), df/db_i)
        for (int j = 0; j < d; ++j) {
            const double cross = r > 0.0 ? l * diff(i) * diff(j) / r : 0.0;
            k(1 + i, 1 + j) = sigma2 * l * l * e * ((i == j ? 1.0 : 0.0) - cross);
        }
    }
    return k;
}

struct DenseResult {
    double mean = 0.0;
    Eigen::VectorXd grad;
    double var = 0.0;
};

// Zero-mean GP with value and gradient observations at every point; noise
// variances on the diagonal; solved with a full-pivot LU.
inline DenseResult DenseGp(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const Eigen::MatrixXd &grads,
                           const Eigen::VectorXd &value_noise_std, double grad_noise_std, double l,
                           double sigma2, const Eigen::VectorXd &q) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    const int s = d + 1;
    Eigen::MatrixXd k(n * s, n * s);
    Eigen::VectorXd t(n * s);
    for (int i = 0; i < n; ++i) {
        t(i * s) = y(i);
        for (int a = 0; a < d; ++a) t(i * s + 1 + a) = grads(i, a);
        for (int j = 0; j < n; ++j) {
            k.block(i * s, j * s, s, s) = JointMatern(x.row(i).transpose(), x.row(j).transpose(), l, sigma2);
        }
        k(i * s, i * s) += value_noise_std(i) * value_noise_std(i);
        for (int a = 0; a < d; ++a) k(i * s + 1 + a, i * s + 1 + a) += grad_noise_std * grad_noise_std;
    }
    Eigen::MatrixXd ks(s, n * s);
    for (int j = 0; j < n; ++j) ks.block(0, j * s, s, s) = JointMatern(q, x.row(j).transpose(), l, sigma2);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
    const Eigen::VectorXd w = lu.solve(t);
    const Eigen::VectorXd m = ks * w;
    DenseResult out;
    out.mean = m(0);
    out.grad = m.tail(d);
    const Eigen::VectorXd v = lu.solve(ks.row(0).transpose());
    out.var = sigma2 - ks.row(0).dot(v);
    return out;
}

inline double Rank(const std::vector<double> &v, std::size_t i) {
    double less = 0.0, equal = 0.0;
    for (double x : v) {
        if (x < v[i]) less += 1.0;
        if (x == v[i]) equal += 1.0;
    }
    return less + (equal + 1.0) / 2.0;
}

// Pearson correlation of average ranks.
inline double Spearman(const std::vector<double> &a, const std::vector<double> &b) {
    const std::size_t n = a.size();
    std::vector<double> ra(n), rb(n);
    for (std::size_t i = 0; i < n; ++i) {
        ra[i] = Rank(a, i);
        rb[i] = Rank(b, i);
    }
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += ra[i] / n;
        mb += rb[i] / n;
    }
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
