#include "gsm/hamiltonian.hpp"

#include <cmath>

#include "gsm/errors.hpp"

namespace gsm::hamiltonian {

namespace {

int part_of(const SubsystemLabel& l) { return static_cast<int>(l.subsystem); }

}  // namespace

void EnergyModel::validate() const {
    const int n = dim();
    if (n == 0) throw ConfigError("EnergyModel: empty model");
    if (stiffness.rows() != n || stiffness.cols() != n ||
        coupling.rows() != n || coupling.cols() != n ||
        static_cast<int>(labels.size()) != n)
        throw ConfigError("EnergyModel: inconsistent dimensions");
    if (mass.minCoeff() <= 0.0)
        throw ConfigError("EnergyModel: mass entries must be positive");
    const double scale = 1.0 + stiffness.cwiseAbs().maxCoeff() +
                         coupling.cwiseAbs().maxCoeff();
    if ((stiffness - stiffness.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale ||
        (coupling - coupling.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw ConfigError("EnergyModel: K and C must be symmetric");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (part_of(labels[i]) == part_of(labels[j]) &&
                coupling(i, j) != 0.0)
                throw ConfigError(
                    "EnergyModel: coupling has nonzero within-subsystem block");
}

EnergyDecomposition total_energy(const HamiltonianState& s,
                                 const EnergyModel& m) {
    const int n = m.dim();
    if (s.q.size() != n || s.p.size() != n)
        throw DataError("total_energy: state dimension mismatch");

    EnergyDecomposition d;
    const Eigen::MatrixXd s_mat = m.stiffness + m.coupling;
    for (int i = 0; i < n; ++i) {
        const int pi = part_of(m.labels[i]);
        d.parts[pi] += 0.5 * s.p[i] * s.p[i] / m.mass[i];
        d.parts[pi] += 0.5 * s.q[i] * s.q[i] * s_mat(i, i);
        for (int j = i + 1; j < n; ++j) {
            const double e = s_mat(i, j) * s.q[i] * s.q[j];
            d.parts[pi] += 0.5 * e;
            d.parts[part_of(m.labels[j])] += 0.5 * e;
        }
    }
    d.total = d.parts[0] + d.parts[1] + d.parts[2];
    return d;
}

std::vector<HamiltonianState> symplectic_integrate(const HamiltonianState& s0,
                                                   const EnergyModel& m,
                                                   double h, int steps) {
    if (!(h > 0.0)) throw ConfigError("symplectic_integrate: step must be positive");
    const int n = m.dim();
    if (s0.q.size() != n || s0.p.size() != n)
        throw DataError("symplectic_integrate: state dimension mismatch");

    const Eigen::MatrixXd s_mat = m.stiffness + m.coupling;
    const Eigen::ArrayXd inv_mass = m.mass.array().inverse();

    std::vector<HamiltonianState> out;
    out.reserve(steps + 1);
    out.push_back(s0);

    Eigen::VectorXd q = s0.q, p = s0.p;
    for (int step = 0; step < steps; ++step) {
        p -= 0.5 * h * (s_mat * q);
        q += h * (p.array() * inv_mass).matrix();
        p -= 0.5 * h * (s_mat * q);
        if (!q.allFinite() || !p.allFinite())
            throw NumericError("symplectic_integrate: non-finite state at step " +
                               std::to_string(step + 1));
        out.push_back({q, p});
    }
    return out;
}

double latent_energy_entropy(const std::vector<double>& parts) {
    double sum = 0.0;
    for (double e : parts) sum += std::max(e, 0.0);
    if (sum <= 0.0)
        throw DataError("latent_energy_entropy: no positive energy part");
    double h = 0.0;
    for (double e : parts) {
        const double share = std::max(e, 0.0) / sum;
        if (share > 0.0) h -= share * std::log(share);
    }
    return h;
}

double latent_energy_entropy(const EnergyDecomposition& d) {
    return latent_energy_entropy(
        std::vector<double>(d.parts.begin(), d.parts.end()));
}

}  // namespace gsm::hamiltonian
