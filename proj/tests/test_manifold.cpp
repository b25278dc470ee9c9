#include <doctest.h>

#include <cmath>
#include <random>

#include "gsm/errors.hpp"
#include "gsm/manifold.hpp"
#include "helpers.hpp"

using namespace gsm::manifold;
using test_helpers::random_spd;

TEST_CASE("spd construction rejects bad input") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 0.5, 0.3, 1;  // asymmetric
    CHECK_THROWS_AS(SpdMatrix{m}, gsm::DataError);
    m << 1, 2, 2, 1;  // indefinite
    CHECK_THROWS_AS(SpdMatrix{m}, gsm::DataError);
    m << 1, 0.5, 0.5, 1;
    CHECK_NOTHROW(SpdMatrix{m});
}

TEST_CASE("log and exp closed forms") {
    const SpdMatrix id(Eigen::MatrixXd::Identity(3, 3));
    CHECK(spd_log(id).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = std::exp(1.0);
    d(1, 1) = std::exp(2.0);
    const Eigen::MatrixXd l = spd_log(SpdMatrix(d));
    CHECK(l(0, 0) == doctest::Approx(1.0));
    CHECK(l(1, 1) == doctest::Approx(2.0));
    CHECK(std::abs(l(0, 1)) < 1e-12);
}

TEST_CASE("exp(log(A)) round-trips random 8x8") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 20; ++i) {
        const SpdMatrix a = random_spd(8, rng);
        const SpdMatrix back = spd_exp(spd_log(a));
        CHECK((back.mat() - a.mat()).norm() < 1e-8 * (1.0 + a.mat().norm()));
    }
}

TEST_CASE("geodesic distance closed forms") {
    std::mt19937_64 rng(7);
    const SpdMatrix a = random_spd(4, rng);
    CHECK(geodesic_distance(a, a) == doctest::Approx(0.0).epsilon(1e-9));

    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(2, 2);
    d(0, 0) = std::exp(2.0);
    CHECK(geodesic_distance(SpdMatrix(Eigen::MatrixXd::Identity(2, 2)),
                            SpdMatrix(d)) == doctest::Approx(2.0));
}

TEST_CASE("congruence invariance and triangle inequality") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const SpdMatrix a = random_spd(5, rng), b = random_spd(5, rng),
                        c = random_spd(5, rng);
        Eigen::MatrixXd gm = test_helpers::random_gaussian(5, 5, rng);
        while (std::abs(gm.determinant()) < 1e-6)
            gm = test_helpers::random_gaussian(5, 5, rng);
        const GroupElement g(gm);
        const double d0 = geodesic_distance(a, b);
        const double d1 = geodesic_distance(g.act(a), g.act(b));
        CHECK(std::abs(d0 - d1) <= 1e-8 * (1.0 + d0));
        CHECK(geodesic_distance(a, c) <=
              geodesic_distance(a, b) + geodesic_distance(b, c) + 1e-8);
    }
}

TEST_CASE("frechet mean: singleton, midpoint oracle, diagonal case") {
    std::mt19937_64 rng(3);
    const SpdMatrix a = random_spd(4, rng);
    CHECK((frechet_mean({a}).mat() - a.mat()).norm() < 1e-9);

    for (int i = 0; i < 10; ++i) {
        const SpdMatrix x = random_spd(4, rng), y = random_spd(4, rng);
        const Eigen::MatrixXd mid =
            test_helpers::geodesic_midpoint(x.mat(), y.mat());
        CHECK((frechet_mean({x, y}).mat() - mid).norm() < 1e-6);
    }

    // Commuting diagonal points: element-wise geometric mean of eigenvalues.
    Eigen::MatrixXd d1 = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Identity(2, 2);
    d1.diagonal() << 1.0, 4.0;
    d2.diagonal() << 9.0, 16.0;
    const SpdMatrix m = frechet_mean({SpdMatrix(d1), SpdMatrix(d2)});
    CHECK(m.mat()(0, 0) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(m.mat()(1, 1) == doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("frechet mean equivariance under congruence") {
    std::mt19937_64 rng(5);
    std::vector<SpdMatrix> pts;
    for (int i = 0; i < 5; ++i) pts.push_back(random_spd(3, rng));
    const GroupElement g(test_helpers::random_gaussian(3, 3, rng) +
                         3.0 * Eigen::MatrixXd::Identity(3, 3));
    std::vector<SpdMatrix> moved;
    for (const auto& p : pts) moved.push_back(g.act(p));
    const SpdMatrix m1 = g.act(frechet_mean(pts, 1e-12, 500));
    const SpdMatrix m2 = frechet_mean(moved, 1e-12, 500);
    CHECK(geodesic_distance(m1, m2) < 1e-6);
}

TEST_CASE("curvature proxy: flat commuting triple, CAT(0) sign") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(3, 3);
    auto diag = [&](double a, double b, double c) {
        Eigen::MatrixXd m = d;
        m.diagonal() << a, b, c;
        return SpdMatrix{m};
    };
    CHECK(std::abs(curvature_proxy(diag(1, 2, 3), diag(2, 1, 5),
                                   diag(4, 3, 1))) < 1e-8);

    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const double delta = curvature_proxy(
            random_spd(4, rng), random_spd(4, rng), random_spd(4, rng));
        CHECK(delta >= -1e-8);
    }

    const SpdMatrix a = random_spd(3, rng);
    CHECK_THROWS_AS(curvature_proxy(a, a, random_spd(3, rng)), gsm::DataError);
}

TEST_CASE("embed_modality wraps and preserves distances") {
    CHECK_THROWS_AS(embed_modality({}, "EEG"), gsm::DataError);
    std::mt19937_64 rng(17);
    std::vector<SpdMatrix> pts{random_spd(3, rng), random_spd(3, rng)};
    const auto emb = embed_modality(pts, "EEG");
    REQUIRE(emb.points.size() == 2);
    CHECK(geodesic_distance(emb.points[0], emb.points[1]) ==
          doctest::Approx(geodesic_distance(pts[0], pts[1])));
}

TEST_CASE("parallel pairwise distances match the serial reference") {
    std::mt19937_64 rng(19);
    std::vector<SpdMatrix> pts;
    for (int i = 0; i < 12; ++i) pts.push_back(random_spd(4, rng));
    for (const Metric m : {Metric::AffineInvariant, Metric::LogEuclidean}) {
        const Eigen::MatrixXd ref = pairwise_distances_serial(pts, m);
        const Eigen::MatrixXd par = pairwise_distances(pts, m);
        CHECK((ref - par).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((ref - ref.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
}
