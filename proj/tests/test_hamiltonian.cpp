#include <doctest.h>

#include <cmath>
#include <random>

#include "gsm/errors.hpp"
#include "gsm/hamiltonian.hpp"
#include "helpers.hpp"

using namespace gsm::hamiltonian;

namespace {

EnergyModel oscillator() {
    EnergyModel m;
    m.mass = Eigen::VectorXd::Ones(1);
    m.stiffness = Eigen::MatrixXd::Identity(1, 1);
    m.coupling = Eigen::MatrixXd::Zero(1, 1);
    m.labels = {{Subsystem::Cortical, BrainstemNucleus::None}};
    return m;
}

EnergyModel three_node() {
    EnergyModel m;
    m.mass = Eigen::VectorXd::Ones(3);
    m.mass << 1.0, 2.0, 0.5;
    m.stiffness = Eigen::MatrixXd::Identity(3, 3);
    m.coupling = Eigen::MatrixXd::Zero(3, 3);
    m.coupling(0, 1) = m.coupling(1, 0) = 0.2;
    m.coupling(1, 2) = m.coupling(2, 1) = 0.3;
    m.labels = {{Subsystem::Cortical, BrainstemNucleus::None},
                {Subsystem::Brainstem, BrainstemNucleus::Raphe},
                {Subsystem::Cardiac, BrainstemNucleus::None}};
    return m;
}

HamiltonianState state(std::initializer_list<double> q,
                       std::initializer_list<double> p) {
    HamiltonianState s;
    s.q = Eigen::VectorXd::Map(std::data(q), Eigen::Index(q.size()));
    s.p = Eigen::VectorXd::Map(std::data(p), Eigen::Index(p.size()));
    return s;
}

}  // namespace

TEST_CASE("energy model validation") {
    EnergyModel bad = three_node();
    bad.coupling(0, 0) = 0.1;  // diagonal must stay zero
    CHECK_THROWS_AS(bad.validate(), gsm::ConfigError);
    bad = three_node();
    bad.coupling(0, 1) = 0.0;  // now asymmetric
    CHECK_THROWS_AS(bad.validate(), gsm::ConfigError);
    bad = three_node();
    bad.mass[1] = -1.0;
    CHECK_THROWS_AS(bad.validate(), gsm::ConfigError);
    // within-subsystem coupling rejected
    bad = three_node();
    bad.labels[1] = {Subsystem::Cortical, BrainstemNucleus::None};
    CHECK_THROWS_AS(bad.validate(), gsm::ConfigError);
}

TEST_CASE("total energy closed forms and decomposition identity") {
    const EnergyModel osc = oscillator();
    CHECK(total_energy(state({0.0}, {0.0}), osc).total == doctest::Approx(0.0));
    CHECK(total_energy(state({1.0}, {0.0}), osc).total == doctest::Approx(0.5));

    const EnergyModel m = three_node();
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int i = 0; i < 50; ++i) {
        HamiltonianState s;
        s.q = test_helpers::random_gaussian(3, 1, rng);
        s.p = test_helpers::random_gaussian(3, 1, rng);
        const auto d = total_energy(s, m);
        CHECK(std::abs(d.parts[0] + d.parts[1] + d.parts[2] - d.total) <
              1e-12 * (1.0 + std::abs(d.total)));
    }
}

TEST_CASE("leapfrog tracks the harmonic oscillator") {
    const EnergyModel m = oscillator();
    const double h = 1e-3;
    const auto traj = symplectic_integrate(state({1.0}, {0.0}), m, h, 10000);
    double max_err = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        max_err = std::max(max_err,
                           std::abs(traj[i].q[0] - std::cos(double(i) * h)));
    CHECK(max_err < 1e-3);
}

TEST_CASE("energy conservation and bounded oscillation") {
    const EnergyModel m = oscillator();
    const double h = 1e-2;
    const auto traj = symplectic_integrate(state({1.0}, {0.0}), m, h, 10000);
    const double h0 = total_energy(traj.front(), m).total;
    // Final-time drift is well under 1e-5; the within-step oscillation is
    // bounded by h^2 w^2 / 4.
    CHECK(std::abs(total_energy(traj.back(), m).total - h0) / h0 < 1e-5);
    double max_osc = 0.0;
    for (const auto& s : traj)
        max_osc = std::max(max_osc,
                           std::abs(total_energy(s, m).total - h0) / h0);
    CHECK(max_osc < h * h / 4.0 + 1e-9);
}

TEST_CASE("no secular energy growth over 1e5 steps") {
    const EnergyModel m = three_node();
    const auto traj =
        symplectic_integrate(state({1.0, -0.5, 0.3}, {0.0, 0.2, -0.1}), m,
                             1e-2, 100000);
    const double h0 = total_energy(traj.front(), m).total;
    double max_dev = 0.0;
    for (std::size_t i = 0; i < traj.size(); i += 97)
        max_dev = std::max(max_dev,
                           std::abs(total_energy(traj[i], m).total - h0) / h0);
    CHECK(max_dev < 1e-3);
}

TEST_CASE("time reversibility") {
    const EnergyModel m = three_node();
    const HamiltonianState s0 = state({0.7, -0.2, 0.4}, {0.1, 0.3, -0.5});
    const auto fwd = symplectic_integrate(s0, m, 1e-2, 1000);
    HamiltonianState turn = fwd.back();
    turn.p = -turn.p;
    const auto back = symplectic_integrate(turn, m, 1e-2, 1000);
    CHECK((back.back().q - s0.q).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((back.back().p + s0.p).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("free motion when stiffness vanishes") {
    EnergyModel m = oscillator();
    m.stiffness.setZero();
    const auto traj = symplectic_integrate(state({0.0}, {2.0}), m, 0.1, 10);
    CHECK(traj.back().p[0] == doctest::Approx(2.0));
    CHECK(traj.back().q[0] == doctest::Approx(2.0));  // q = p/m * t = 2*1
}

TEST_CASE("one leapfrog step is a symplectic map") {
    // Jacobian of the linear step must satisfy S^T J S = J.
    const EnergyModel m = three_node();
    const int n = 3;
    const double h = 0.05;
    Eigen::MatrixXd big(2 * n, 2 * n);
    for (int col = 0; col < 2 * n; ++col) {
        HamiltonianState s;
        s.q = Eigen::VectorXd::Zero(n);
        s.p = Eigen::VectorXd::Zero(n);
        if (col < n) s.q[col] = 1.0;
        else s.p[col - n] = 1.0;
        const auto out = symplectic_integrate(s, m, h, 1).back();
        big.block(0, col, n, 1) = out.q;
        big.block(n, col, n, 1) = out.p;
    }
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    j.block(0, n, n, n) = Eigen::MatrixXd::Identity(n, n);
    j.block(n, 0, n, n) = -Eigen::MatrixXd::Identity(n, n);
    CHECK((big.transpose() * j * big - j).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("latent energy entropy closed forms") {
    CHECK(latent_energy_entropy(std::vector<double>{1.0, 1.0, 1.0}) ==
          doctest::Approx(std::log(3.0)));
    CHECK(latent_energy_entropy(std::vector<double>{5.0, 0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(latent_energy_entropy(std::vector<double>{2.0, 1.0, 1.0}) ==
          doctest::Approx(1.0397).epsilon(1e-4));
    // permutation and scale invariance
    CHECK(latent_energy_entropy(std::vector<double>{1.0, 2.0, 4.0}) ==
          doctest::Approx(latent_energy_entropy(std::vector<double>{4.0, 1.0, 2.0})));
    CHECK(latent_energy_entropy(std::vector<double>{1.0, 2.0, 4.0}) ==
          doctest::Approx(latent_energy_entropy(std::vector<double>{10.0, 20.0, 40.0})));
    // negatives clamped; all-nonpositive rejected
    CHECK(latent_energy_entropy(std::vector<double>{-1.0, 3.0, 0.0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(latent_energy_entropy(std::vector<double>{-1.0, 0.0, -2.0}), gsm::DataError);
}
