#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace gsm::fractional {

// Caputo order, restricted to (0, 1].
class FractionalOrder {
public:
    explicit FractionalOrder(double alpha);
    double value() const { return alpha_; }

private:
    double alpha_;
};

struct FracTrajectory {
    std::vector<double> time;                // uniform grid, step h
    std::vector<Eigen::VectorXd> values;     // one state per grid point
    double alpha = 1.0;
    std::optional<std::uint64_t> seed;
};

struct DriftSpec {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> drift;
    double sigma = 0.0;  // Brownian perturbation amplitude, >= 0
};

// L1 discretization of the Caputo derivative of order alpha on a uniform
// grid with step h. Output[0] is 0 by convention.
std::vector<double> caputo_derivative(const std::vector<double>& samples,
                                      FractionalOrder alpha, double h);

// One-parameter Mittag-Leffler function E_alpha(z) by power series,
// truncated at 1e-12 within at most 500 terms.
double mittag_leffler(FractionalOrder alpha, double z);

// Adams-Bashforth-Moulton predictor-corrector for
//   D_t^alpha x = f(x) + sigma dB_t,  x(0) = x0,
// with full (untruncated) memory weights. memory_window limits the history
// length when set; truncation introduces an O((t - t_window)^{-alpha})
// tail error. Gaussian increments of variance h, scaled by sigma, are
// added after each corrector step; the path is deterministic given seed.
FracTrajectory integrate_fsde(const DriftSpec& drift, FractionalOrder alpha,
                              const Eigen::VectorXd& x0, double horizon,
                              double h, std::uint64_t seed = 0,
                              std::optional<int> memory_window = std::nullopt);

struct MemoryIndexResult {
    double hurst = 0.5;
    bool super_diffusive = false;  // raw slope exceeded 1, value capped
};

// Detrended fluctuation analysis: least-squares slope of log F(n) against
// log n over dyadic box sizes. Needs at least 256 samples.
MemoryIndexResult memory_index_info(const std::vector<double>& series);
double memory_index(const std::vector<double>& series);

}  // namespace gsm::fractional
