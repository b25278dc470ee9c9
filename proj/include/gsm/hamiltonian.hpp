#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gsm::hamiltonian {

enum class Subsystem { Cortical, Brainstem, Cardiac };

enum class BrainstemNucleus {
    None,
    Retrotrapezoid,
    LocusCoeruleus,
    Raphe,
    NucleusTractusSolitarius,
    Hypothalamus,
};

struct SubsystemLabel {
    Subsystem subsystem = Subsystem::Cortical;
    BrainstemNucleus nucleus = BrainstemNucleus::None;  // brainstem only
};

struct HamiltonianState {
    Eigen::VectorXd q;
    Eigen::VectorXd p;
};

// Quadratic energy H = p^T M^{-1} p / 2 + q^T (K + C) q / 2 over labeled
// nodes. M is diagonal positive; K is the per-node stiffness; C couples
// nodes across subsystems (zero diagonal blocks, symmetric).
struct EnergyModel {
    Eigen::VectorXd mass;          // diagonal of M, all > 0
    Eigen::MatrixXd stiffness;     // K, symmetric PSD
    Eigen::MatrixXd coupling;      // C, symmetric, zero within-subsystem blocks
    std::vector<SubsystemLabel> labels;

    int dim() const { return static_cast<int>(mass.size()); }
    void validate() const;
};

struct EnergyDecomposition {
    double total = 0.0;
    std::array<double, 3> parts{};  // Cortical, Brainstem, Cardiac

    double cortical() const { return parts[0]; }
    double brainstem() const { return parts[1]; }
    double cardiac() const { return parts[2]; }
};

// Kinetic and diagonal-stiffness energy go to each node's subsystem;
// off-diagonal (stiffness and coupling) energy is split half/half between
// the two subsystems involved. Parts sum to the total exactly.
EnergyDecomposition total_energy(const HamiltonianState& s, const EnergyModel& m);

// Stoermer-Verlet (kick-drift-kick) leapfrog. Returns states at every
// whole step including the initial one.
std::vector<HamiltonianState> symplectic_integrate(const HamiltonianState& s0,
                                                   const EnergyModel& m,
                                                   double h, int steps);

// Shannon entropy of the subsystem energy shares. Negative parts are
// clamped to zero before normalization.
double latent_energy_entropy(const EnergyDecomposition& d);
double latent_energy_entropy(const std::vector<double>& parts);

}  // namespace gsm::hamiltonian
