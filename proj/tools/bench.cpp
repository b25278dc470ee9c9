// Timing harness: serial reference kernels vs the OpenMP versions.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gsm/manifold.hpp"
#include "gsm/signals.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

std::vector<gsm::manifold::SpdMatrix> random_spd(int count, int dim,
                                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<gsm::manifold::SpdMatrix> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        Eigen::MatrixXd m(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) m(r, c) = g(rng);
        out.emplace_back(m * m.transpose() +
                         0.1 * Eigen::MatrixXd::Identity(dim, dim));
    }
    return out;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
    std::printf("openmp: unavailable, parallel kernels run serial\n");
#endif

    {
        const auto pts = random_spd(160, 8, 7);
        const auto t0 = Clock::now();
        const auto ref = gsm::manifold::pairwise_distances_serial(pts);
        const auto t1 = Clock::now();
        const auto par = gsm::manifold::pairwise_distances(pts);
        const auto t2 = Clock::now();
        const double diff = (ref - par).cwiseAbs().maxCoeff();
        std::printf(
            "pairwise_distances  n=%zu dim=8   serial %.3fs  parallel %.3fs  "
            "max|diff| %.2e\n",
            pts.size(), seconds(t0, t1), seconds(t1, t2), diff);
    }

    {
        gsm::signals::TimeSeriesWindow w;
        w.modality = gsm::signals::Modality::EEG;
        w.sample_rate = 512.0;
        std::mt19937_64 rng(11);
        std::normal_distribution<double> g;
        w.values = Eigen::MatrixXd::NullaryExpr(
            8, 512 * 60, [&](Eigen::Index, Eigen::Index) { return g(rng); });
        const auto t0 = Clock::now();
        const auto ref = gsm::signals::sliding_covariance_serial(w, 512, 64);
        const auto t1 = Clock::now();
        const auto par = gsm::signals::sliding_covariance(w, 512, 64);
        const auto t2 = Clock::now();
        double diff = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i)
            diff = std::max(diff,
                            (ref[i].mat() - par[i].mat()).cwiseAbs().maxCoeff());
        std::printf(
            "sliding_covariance  windows=%zu     serial %.3fs  parallel %.3fs  "
            "max|diff| %.2e\n",
            ref.size(), seconds(t0, t1), seconds(t1, t2), diff);
    }
    return 0;
}
