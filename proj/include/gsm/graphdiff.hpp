#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsm/fractional.hpp"

namespace gsm::graphdiff {

// Labeled connectome: symmetric nonnegative adjacency, zero diagonal.
struct BrainGraph {
    std::vector<std::string> labels;
    Eigen::MatrixXd adjacency;

    int n_regions() const { return static_cast<int>(adjacency.rows()); }
    void validate() const;
};

struct RiskState {
    Eigen::VectorXd x;  // per-region ischemic risk, clamped at 0
    double t = 0.0;     // minutes
};

struct DiffusionParams {
    double alpha = 1.0;  // Caputo order
    double beta = 0.0;   // diffusion rate
    double gamma = 0.0;  // recovery rate
};

// D^{-1/2} (A + I) D^{-1/2} with self-loop-augmented degrees.
Eigen::MatrixXd normalized_adjacency(const BrainGraph& g);

enum class Activation { Relu, Tanh, Identity };

// H' = act(D^{-1/2}(A+I)D^{-1/2} H W).
Eigen::MatrixXd gcn_layer(const Eigen::MatrixXd& h, const BrainGraph& g,
                          const Eigen::MatrixXd& w, Activation act);

// Fractional linear diffusion D_t^alpha X = beta A X - gamma X via the
// Adams-Bashforth-Moulton solver; risk clamped at 0 after each step.
std::vector<RiskState> fractional_diffuse(const BrainGraph& g,
                                          const DiffusionParams& p,
                                          const RiskState& x0, double horizon,
                                          double h);

// Learnable diffusion surrogate X(t+1) = act(w A X + b - gamma X).
RiskState discrete_gcn_diffusion(const RiskState& x, const BrainGraph& g,
                                 const Eigen::MatrixXd& w,
                                 const Eigen::VectorXd& b, double gamma,
                                 Activation act = Activation::Relu);

struct CentralityResult {
    Eigen::VectorXd centrality;
    bool rescaled = false;  // spectral radius of beta*A exceeded 1
};

// Cumulative walk exposure (sum_{t=1..T} (beta A)^t) 1. When beta*A has
// spectral radius above 1 the powers are computed on the unit-scaled
// matrix and the result is flagged.
CentralityResult diffusion_centrality_info(const BrainGraph& g, double beta,
                                           int t_max);
Eigen::VectorXd diffusion_centrality(const BrainGraph& g, double beta,
                                     int t_max);

void write_graph_json(const std::filesystem::path& path, const BrainGraph& g);
BrainGraph read_graph_json(const std::filesystem::path& path);

// Bundled desk-scale connectome: 8 cortical, 3 subcortical and the 5
// brainstem autonomic nuclei, brainstem-dense wiring.
BrainGraph default_brain_graph();

}  // namespace gsm::graphdiff
