#include "gsm/fractional.hpp"

#include <cmath>
#include <random>

#include "gsm/errors.hpp"

namespace gsm::fractional {

FractionalOrder::FractionalOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw ConfigError("FractionalOrder: alpha must be in (0, 1]");
}

std::vector<double> caputo_derivative(const std::vector<double>& samples,
                                      FractionalOrder alpha, double h) {
    if (samples.size() < 3)
        throw DataError("caputo_derivative: need at least 3 samples");
    if (!(h > 0.0)) throw ConfigError("caputo_derivative: step must be positive");

    const double a = alpha.value();
    const std::size_t n = samples.size();
    // L1 weights b_k = (k+1)^{1-a} - k^{1-a}; 0^{1-a} is 0 even at a = 1
    // (std::pow(0, 0) would give 1 and zero out the k = 0 weight).
    std::vector<double> b(n - 1);
    b[0] = 1.0;
    for (std::size_t k = 1; k + 1 < n; ++k)
        b[k] = std::pow(double(k + 1), 1.0 - a) - std::pow(double(k), 1.0 - a);

    const double scale = std::pow(h, -a) / std::tgamma(2.0 - a);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < i; ++k)
            acc += b[k] * (samples[i - k] - samples[i - k - 1]);
        out[i] = scale * acc;
    }
    return out;
}

double mittag_leffler(FractionalOrder alpha, double z) {
    const double a = alpha.value();
    double sum = 0.0;
    for (int k = 0; k < 500; ++k) {
        const double sign = (z < 0.0 && (k % 2)) ? -1.0 : 1.0;
        const double log_term =
            (k == 0 ? 0.0 : k * std::log(std::abs(z))) - std::lgamma(a * k + 1.0);
        const double term = (z == 0.0 && k > 0) ? 0.0 : sign * std::exp(log_term);
        sum += term;
        if (std::abs(term) < 1e-12 * std::max(1.0, std::abs(sum)) && k > 2)
            return sum;
    }
    throw NumericError("mittag_leffler: series did not converge in 500 terms");
}

FracTrajectory integrate_fsde(const DriftSpec& drift, FractionalOrder alpha,
                              const Eigen::VectorXd& x0, double horizon,
                              double h, std::uint64_t seed,
                              std::optional<int> memory_window) {
    if (!(horizon > 0.0) || !(h > 0.0))
        throw ConfigError("integrate_fsde: horizon and step must be positive");
    const auto n_steps = static_cast<std::size_t>(std::llround(horizon / h));
    if (n_steps > 10'000'000)
        throw ConfigError("integrate_fsde: more than 1e7 steps requested");
    if (drift.sigma < 0.0)
        throw ConfigError("integrate_fsde: sigma must be nonnegative");

    const double a = alpha.value();
    const double ha_g1 = std::pow(h, a) / std::tgamma(a + 1.0);
    const double ha_g2 = std::pow(h, a) / std::tgamma(a + 2.0);

    FracTrajectory traj;
    traj.alpha = a;
    traj.seed = seed;
    traj.time.reserve(n_steps + 1);
    traj.values.reserve(n_steps + 1);
    traj.time.push_back(0.0);
    traj.values.push_back(x0);

    std::vector<Eigen::VectorXd> fhist;
    fhist.reserve(n_steps + 1);
    fhist.push_back(drift.drift(x0));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double noise_scale = drift.sigma * std::sqrt(h);

    Eigen::VectorXd accumulated_noise = Eigen::VectorXd::Zero(x0.size());

    for (std::size_t n = 0; n < n_steps; ++n) {
        const std::size_t j_lo =
            memory_window && n + 1 > static_cast<std::size_t>(*memory_window)
                ? n + 1 - static_cast<std::size_t>(*memory_window)
                : 0;

        // Predictor: fractional Adams-Bashforth.
        Eigen::VectorXd pred = Eigen::VectorXd::Zero(x0.size());
        for (std::size_t j = j_lo; j <= n; ++j) {
            const double bw = std::pow(double(n + 1 - j), a) -
                              std::pow(double(n - j), a);
            pred += bw * fhist[j];
        }
        pred = x0 + ha_g1 * pred + accumulated_noise;

        // Corrector: fractional Adams-Moulton.
        Eigen::VectorXd corr = drift.drift(pred);
        for (std::size_t j = j_lo; j <= n; ++j) {
            double aw;
            if (j == 0) {
                aw = std::pow(double(n), a + 1.0) -
                     (double(n) - a) * std::pow(double(n + 1), a);
            } else {
                const double d = double(n - j);
                aw = std::pow(d + 2.0, a + 1.0) + std::pow(d, a + 1.0) -
                     2.0 * std::pow(d + 1.0, a + 1.0);
            }
            corr += aw * fhist[j];
        }
        Eigen::VectorXd next = x0 + ha_g2 * corr + accumulated_noise;

        if (drift.sigma > 0.0) {
            Eigen::VectorXd dw(x0.size());
            for (Eigen::Index i = 0; i < dw.size(); ++i) dw[i] = gauss(rng);
            accumulated_noise += noise_scale * dw;
            next += noise_scale * dw;
        }

        if (!next.allFinite())
            throw NumericError("integrate_fsde: non-finite state at step " +
                               std::to_string(n + 1));
        traj.time.push_back(double(n + 1) * h);
        traj.values.push_back(next);
        fhist.push_back(drift.drift(next));
    }
    return traj;
}

MemoryIndexResult memory_index_info(const std::vector<double>& series) {
    const std::size_t n = series.size();
    if (n < 256) throw DataError("memory_index: need at least 256 samples");

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= double(n);

    // Integrated profile.
    std::vector<double> y(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += series[i] - mean;
        y[i] = acc;
    }

    std::vector<double> log_n, log_f;
    for (std::size_t box = 8; box <= n / 4; box *= 2) {
        const std::size_t n_boxes = n / box;
        double ss = 0.0;
        std::size_t count = 0;
        // Forward and backward coverage of the profile.
        for (int dir = 0; dir < 2; ++dir) {
            for (std::size_t b = 0; b < n_boxes; ++b) {
                const std::size_t start =
                    dir == 0 ? b * box : n - (b + 1) * box;
                // Linear detrend of y[start .. start+box).
                double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
                for (std::size_t i = 0; i < box; ++i) {
                    const double xi = double(i);
                    const double yi = y[start + i];
                    sx += xi; sy += yi; sxx += xi * xi; sxy += xi * yi;
                }
                const double m = double(box);
                const double denom = m * sxx - sx * sx;
                const double slope = (m * sxy - sx * sy) / denom;
                const double icept = (sy - slope * sx) / m;
                for (std::size_t i = 0; i < box; ++i) {
                    const double r = y[start + i] - (icept + slope * double(i));
                    ss += r * r;
                }
                count += box;
            }
        }
        const double f = std::sqrt(ss / double(count));
        if (f <= 0.0)
            throw DataError("memory_index: zero fluctuation (constant series)");
        log_n.push_back(std::log(double(box)));
        log_f.push_back(std::log(f));
    }
    if (log_n.size() < 3)
        throw DataError("memory_index: too few scales");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = double(log_n.size());
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        sx += log_n[i]; sy += log_f[i];
        sxx += log_n[i] * log_n[i]; sxy += log_n[i] * log_f[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

    MemoryIndexResult res;
    if (slope > 1.0) {
        res.hurst = 1.0;
        res.super_diffusive = true;
    } else {
        res.hurst = std::max(slope, 1e-6);
    }
    return res;
}

double memory_index(const std::vector<double>& series) {
    return memory_index_info(series).hurst;
}

}  // namespace gsm::fractional
