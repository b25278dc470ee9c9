#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gsm/manifold.hpp"

namespace test_helpers {

inline Eigen::MatrixXd random_gaussian(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
}

inline gsm::manifold::SpdMatrix random_spd(int dim, std::mt19937_64& rng,
                                           double ridge = 0.1) {
    const Eigen::MatrixXd m = random_gaussian(dim, dim, rng);
    return gsm::manifold::SpdMatrix(
        m * m.transpose() + ridge * Eigen::MatrixXd::Identity(dim, dim));
}

// sqrtm via eigendecomposition; oracle-side only.
inline Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    return es.eigenvectors() *
           es.eigenvalues().cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

// Closed-form geodesic midpoint A^{1/2}(A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}.
inline Eigen::MatrixXd geodesic_midpoint(const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& b) {
    const Eigen::MatrixXd as = spd_sqrt(a);
    const Eigen::MatrixXd asi = as.inverse();
    return as * spd_sqrt(asi * b * asi) * as;
}

// Fractional Gaussian noise by the Hosking (Durbin-Levinson) recursion.
// O(N^2) but exact in distribution; fine at test sizes.
inline std::vector<double> fgn_hosking(int n, double hurst,
                                       std::uint64_t seed) {
    auto gamma = [hurst](int k) {
        const double a = std::abs(double(k));
        return 0.5 * (std::pow(a + 1.0, 2 * hurst) -
                      2.0 * std::pow(a, 2 * hurst) +
                      std::pow(std::abs(a - 1.0), 2 * hurst));
    };
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> x(n), phi(n, 0.0), phi_prev(n, 0.0);
    double v = 1.0;
    x[0] = g(rng);
    for (int i = 1; i < n; ++i) {
        double acc = gamma(i);
        for (int j = 0; j < i - 1; ++j) acc -= phi_prev[j] * gamma(i - 1 - j);
        const double k = acc / v;
        phi[i - 1] = k;
        for (int j = 0; j < i - 1; ++j)
            phi[j] = phi_prev[j] - k * phi_prev[i - 2 - j];
        v *= (1.0 - k * k);
        double mean = 0.0;
        for (int j = 0; j < i; ++j) mean += phi[j] * x[i - 1 - j];
        x[i] = mean + std::sqrt(v) * g(rng);
        phi_prev = phi;
    }
    return x;
}

}  // namespace test_helpers
