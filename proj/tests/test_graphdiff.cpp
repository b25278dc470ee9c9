#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "gsm/errors.hpp"
#include "gsm/graphdiff.hpp"
#include "helpers.hpp"

using namespace gsm::graphdiff;

namespace {

BrainGraph cycle_graph(int n) {
    BrainGraph g;
    g.adjacency = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        g.adjacency(i, (i + 1) % n) = 1.0;
        g.adjacency((i + 1) % n, i) = 1.0;
        g.labels.push_back("r" + std::to_string(i));
    }
    return g;
}

BrainGraph star_graph(int leaves) {
    BrainGraph g;
    const int n = leaves + 1;
    g.adjacency = Eigen::MatrixXd::Zero(n, n);
    g.labels.push_back("center");
    for (int i = 1; i < n; ++i) {
        g.adjacency(0, i) = g.adjacency(i, 0) = 1.0;
        g.labels.push_back("leaf" + std::to_string(i));
    }
    return g;
}

}  // namespace

TEST_CASE("graph validation") {
    BrainGraph g = cycle_graph(4);
    CHECK_NOTHROW(g.validate());
    g.adjacency(0, 1) = 2.0;  // asymmetric
    CHECK_THROWS_AS(g.validate(), gsm::DataError);
    g = cycle_graph(4);
    g.adjacency(1, 1) = 0.5;  // diagonal
    CHECK_THROWS_AS(g.validate(), gsm::DataError);
    g = cycle_graph(4);
    g.adjacency(0, 2) = g.adjacency(2, 0) = -1.0;
    CHECK_THROWS_AS(g.validate(), gsm::DataError);
}

TEST_CASE("normalized adjacency closed forms") {
    BrainGraph empty;
    empty.adjacency = Eigen::MatrixXd::Zero(3, 3);
    empty.labels = {"a", "b", "c"};
    CHECK((normalized_adjacency(empty) - Eigen::MatrixXd::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    // 2-regular cycle: every nonzero entry 1/(d+1) = 1/3.
    const auto norm = normalized_adjacency(cycle_graph(5));
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            if (norm(i, j) != 0.0)
                CHECK(norm(i, j) == doctest::Approx(1.0 / 3.0));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(norm);
    CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-10);
}

TEST_CASE("gcn layer formula") {
    BrainGraph g = cycle_graph(3);
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(3, 3);

    // A=0 graph: layer reduces to H W.
    BrainGraph empty;
    empty.adjacency = Eigen::MatrixXd::Zero(3, 3);
    empty.labels = g.labels;
    Eigen::MatrixXd hh(3, 3);
    hh << 1, -2, 3, 0, 4, -1, 2, 2, 0;
    CHECK((gcn_layer(hh, empty, w, Activation::Identity) - hh)
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    // Hand case on the triangle: every augmented degree is 3, so the
    // propagation matrix is 1/3 in every entry.
    const Eigen::MatrixXd out = gcn_layer(hh, g, w, Activation::Identity);
    const Eigen::MatrixXd expect =
        Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0) * hh;
    CHECK((out - expect).cwiseAbs().maxCoeff() < 1e-12);

    CHECK(gcn_layer(hh, g, w, Activation::Relu).minCoeff() >= 0.0);
}

TEST_CASE("fractional diffuse: matrix-exponential oracle at alpha=1") {
    std::mt19937_64 rng(33);
    BrainGraph g;
    const int n = 10;
    Eigen::MatrixXd a = test_helpers::random_gaussian(n, n, rng).cwiseAbs();
    a = ((a + a.transpose()) / 2.0).eval();
    a.diagonal().setZero();
    g.adjacency = a / a.maxCoeff();
    for (int i = 0; i < n; ++i) g.labels.push_back("r" + std::to_string(i));

    DiffusionParams p{1.0, 0.3, 0.2};
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    x0[0] = 1.0;
    const auto traj = fractional_diffuse(g, p, {x0, 0.0}, 5.0, 1e-3);
    const Eigen::MatrixXd drift =
        p.beta * g.adjacency - p.gamma * Eigen::MatrixXd::Identity(n, n);
    double max_err = 0.0;
    for (std::size_t i = 0; i < traj.size(); i += 100) {
        const Eigen::VectorXd exact =
            ((drift * traj[i].t).exp() * x0).eval();
        max_err =
            std::max(max_err, (traj[i].x - exact).cwiseAbs().maxCoeff());
    }
    CHECK(max_err < 1e-4);
}

TEST_CASE("fractional diffuse trivia: decay, symmetry, positivity") {
    BrainGraph g = cycle_graph(6);
    // beta=0: decoupled exponential decay
    const auto decay = fractional_diffuse(g, {1.0, 0.0, 0.5},
                                          {Eigen::VectorXd::Ones(6), 0.0},
                                          2.0, 1e-3);
    for (int i = 0; i < 6; ++i)
        CHECK(decay.back().x[i] == doctest::Approx(std::exp(-1.0)).epsilon(1e-4));

    // uniform state on a vertex-transitive graph stays uniform
    const auto uni = fractional_diffuse(g, {0.7, 0.2, 0.1},
                                        {Eigen::VectorXd::Ones(6), 0.0}, 1.0,
                                        1e-2);
    for (const auto& s : uni)
        CHECK(std::abs(s.x.maxCoeff() - s.x.minCoeff()) < 1e-10);

    // positivity plus convergence toward the Perron direction
    Eigen::VectorXd seed = Eigen::VectorXd::Zero(6);
    seed[2] = 1.0;
    const auto traj = fractional_diffuse(g, {1.0, 0.4, 0.0}, {seed, 0.0},
                                         10.0, 1e-2);
    for (const auto& s : traj) CHECK(s.x.minCoeff() >= 0.0);
    const Eigen::VectorXd perron = Eigen::VectorXd::Ones(6).normalized();
    const double cosine =
        traj.back().x.normalized().dot(perron);
    CHECK(cosine > 0.999);
}

TEST_CASE("relabeling equivariance") {
    BrainGraph g = star_graph(4);
    std::vector<int> perm{3, 0, 4, 1, 2};
    Eigen::MatrixXd pm = Eigen::MatrixXd::Zero(5, 5);
    for (int i = 0; i < 5; ++i) pm(perm[i], i) = 1.0;
    BrainGraph gp;
    gp.adjacency = pm * g.adjacency * pm.transpose();
    gp.labels.resize(5);
    for (int i = 0; i < 5; ++i) gp.labels[perm[i]] = g.labels[i];

    Eigen::VectorXd x0(5);
    x0 << 1.0, 0.2, 0.0, 0.5, 0.1;
    const DiffusionParams p{0.8, 0.3, 0.1};
    const auto t1 = fractional_diffuse(g, p, {x0, 0.0}, 1.0, 1e-2);
    const auto t2 =
        fractional_diffuse(gp, p, {(pm * x0).eval(), 0.0}, 1.0, 1e-2);
    CHECK((pm * t1.back().x - t2.back().x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("discrete gcn diffusion closed forms") {
    BrainGraph g = cycle_graph(3);
    Eigen::VectorXd x(3);
    x << 1.0, 2.0, 0.5;

    const auto zero = discrete_gcn_diffusion(
        {x, 0.0}, g, Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Zero(3),
        0.0, Activation::Identity);
    CHECK(zero.x.cwiseAbs().maxCoeff() == 0.0);

    BrainGraph empty;
    empty.adjacency = Eigen::MatrixXd::Zero(3, 3);
    empty.labels = g.labels;
    // With A = 0 only the -gamma term acts; risk is clamped at 0 so a
    // positive state contracts straight to zero, and a positive bias keeps
    // the linear form b - gamma*x visible.
    const auto contract = discrete_gcn_diffusion(
        {x, 0.0}, empty, Eigen::MatrixXd::Zero(3, 3),
        Eigen::VectorXd::Zero(3), 0.25, Activation::Identity);
    CHECK(contract.x.cwiseAbs().maxCoeff() == 0.0);
    const auto biased = discrete_gcn_diffusion(
        {x, 0.0}, empty, Eigen::MatrixXd::Zero(3, 3),
        Eigen::VectorXd::Ones(3), 0.25, Activation::Identity);
    CHECK((biased.x - (Eigen::VectorXd::Ones(3) - 0.25 * x))
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    // 3-node hand case: W A x + b - gamma x, relu clamp.
    Eigen::MatrixXd w(3, 3);
    w << 0.5, 0, 0, 0, 0.5, 0, 0, 0, 0.5;
    Eigen::VectorXd b(3);
    b << 0.1, -5.0, 0.0;
    const Eigen::VectorXd lin =
        (w * (g.adjacency * x) + b - 0.2 * x).cwiseMax(0.0);
    const auto hand =
        discrete_gcn_diffusion({x, 0.0}, g, w, b, 0.2, Activation::Relu);
    CHECK((hand.x - lin).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("diffusion centrality") {
    BrainGraph g = star_graph(4);
    CHECK(diffusion_centrality(g, 0.0, 3).cwiseAbs().maxCoeff() == 0.0);

    // brute-force matrix powers
    const double beta = 0.1;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(5, 5);
    Eigen::MatrixXd pw = Eigen::MatrixXd::Identity(5, 5);
    for (int t = 1; t <= 3; ++t) {
        pw = (pw * (beta * g.adjacency)).eval();
        acc += pw;
    }
    const Eigen::VectorXd brute = acc * Eigen::VectorXd::Ones(5);
    const Eigen::VectorXd dc = diffusion_centrality(g, beta, 3);
    CHECK((dc - brute).cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 1; i < 5; ++i) CHECK(dc[0] > dc[i]);

    // complete graph symmetry
    BrainGraph kg;
    kg.adjacency = Eigen::MatrixXd::Ones(4, 4);
    kg.adjacency.diagonal().setZero();
    kg.labels = {"a", "b", "c", "d"};
    const Eigen::VectorXd kc = diffusion_centrality(kg, 0.2, 4);
    CHECK(std::abs(kc.maxCoeff() - kc.minCoeff()) < 1e-12);

    // spectral radius above 1 computed in scaled form and flagged
    const auto info = diffusion_centrality_info(kg, 2.0, 50);
    CHECK(info.rescaled);
    CHECK(info.centrality.allFinite());
}

TEST_CASE("graph json round-trip and bundled default") {
    const auto path =
        std::filesystem::temp_directory_path() / "gsm_graph_test.json";
    const BrainGraph g = default_brain_graph();
    CHECK(g.n_regions() == 16);
    CHECK_NOTHROW(g.validate());
    int brainstem = 0;
    for (const auto& l : g.labels)
        if (l.find("Nucleus") != std::string::npos ||
            l.find("Coeruleus") != std::string::npos ||
            l.find("Raphe") != std::string::npos ||
            l.find("Hypothalamus") != std::string::npos)
            ++brainstem;
    CHECK(brainstem == 5);

    write_graph_json(path, g);
    const BrainGraph back = read_graph_json(path);
    CHECK(back.labels == g.labels);
    CHECK((back.adjacency - g.adjacency).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
}
