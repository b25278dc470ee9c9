#include "gsm/graphdiff.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gsm/errors.hpp"

namespace gsm::graphdiff {

using json = nlohmann::json;

void BrainGraph::validate() const {
    const int n = n_regions();
    if (n == 0) throw DataError("BrainGraph: empty graph");
    if (adjacency.cols() != n)
        throw DataError("BrainGraph: adjacency is not square");
    if (static_cast<int>(labels.size()) != n)
        throw DataError("BrainGraph: label count does not match regions");
    const double scale = 1.0 + adjacency.cwiseAbs().maxCoeff();
    if ((adjacency - adjacency.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw DataError("BrainGraph: adjacency is not symmetric");
    if (adjacency.minCoeff() < 0.0)
        throw DataError("BrainGraph: adjacency has negative weights");
    for (int i = 0; i < n; ++i)
        if (adjacency(i, i) != 0.0)
            throw DataError("BrainGraph: adjacency diagonal must be zero");
}

Eigen::MatrixXd normalized_adjacency(const BrainGraph& g) {
    g.validate();
    const int n = g.n_regions();
    Eigen::MatrixXd a_tilde =
        g.adjacency + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd d_inv_sqrt =
        a_tilde.rowwise().sum().array().rsqrt();
    return d_inv_sqrt.asDiagonal() * a_tilde * d_inv_sqrt.asDiagonal();
}

namespace {

Eigen::MatrixXd apply_activation(Eigen::MatrixXd m, Activation act) {
    switch (act) {
        case Activation::Relu: return m.cwiseMax(0.0);
        case Activation::Tanh: return m.array().tanh().matrix();
        case Activation::Identity: return m;
    }
    throw ConfigError("unknown activation");
}

}  // namespace

Eigen::MatrixXd gcn_layer(const Eigen::MatrixXd& h, const BrainGraph& g,
                          const Eigen::MatrixXd& w, Activation act) {
    if (h.rows() != g.n_regions())
        throw DataError("gcn_layer: feature rows != regions");
    if (h.cols() != w.rows())
        throw DataError("gcn_layer: feature/weight shape mismatch");
    return apply_activation(normalized_adjacency(g) * h * w, act);
}

std::vector<RiskState> fractional_diffuse(const BrainGraph& g,
                                          const DiffusionParams& p,
                                          const RiskState& x0, double horizon,
                                          double h) {
    g.validate();
    if (p.beta < 0.0 || p.gamma < 0.0)
        throw ConfigError("fractional_diffuse: beta and gamma must be >= 0");
    if (x0.x.size() != g.n_regions())
        throw DataError("fractional_diffuse: state length != regions");

    const Eigen::MatrixXd drift_mat =
        p.beta * g.adjacency -
        p.gamma * Eigen::MatrixXd::Identity(g.n_regions(), g.n_regions());
    fractional::DriftSpec drift{
        [&drift_mat](const Eigen::VectorXd& x) { return drift_mat * x; }, 0.0};

    fractional::FracTrajectory traj = fractional::integrate_fsde(
        drift, fractional::FractionalOrder(p.alpha), x0.x, horizon, h);

    std::vector<RiskState> out;
    out.reserve(traj.values.size());
    for (std::size_t i = 0; i < traj.values.size(); ++i)
        out.push_back({traj.values[i].cwiseMax(0.0), x0.t + traj.time[i]});
    return out;
}

RiskState discrete_gcn_diffusion(const RiskState& x, const BrainGraph& g,
                                 const Eigen::MatrixXd& w,
                                 const Eigen::VectorXd& b, double gamma,
                                 Activation act) {
    const int n = g.n_regions();
    if (x.x.size() != n || w.rows() != n || w.cols() != n || b.size() != n)
        throw DataError("discrete_gcn_diffusion: shape mismatch");
    Eigen::VectorXd next =
        apply_activation(w * (g.adjacency * x.x) + b - gamma * x.x, act);
    return {next.cwiseMax(0.0), x.t + 1.0};
}

CentralityResult diffusion_centrality_info(const BrainGraph& g, double beta,
                                           int t_max) {
    g.validate();
    if (t_max < 1) throw ConfigError("diffusion_centrality: T must be >= 1");
    if (beta < 0.0) throw ConfigError("diffusion_centrality: beta must be >= 0");

    CentralityResult res;
    Eigen::MatrixXd m = beta * g.adjacency;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    if (rho > 1.0) {
        m /= rho;  // keep powers bounded; relative ordering is preserved
        res.rescaled = true;
    }

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.n_regions());
    Eigen::VectorXd walk = ones;
    res.centrality = Eigen::VectorXd::Zero(g.n_regions());
    for (int t = 0; t < t_max; ++t) {
        walk = m * walk;
        res.centrality += walk;
    }
    return res;
}

Eigen::VectorXd diffusion_centrality(const BrainGraph& g, double beta,
                                     int t_max) {
    return diffusion_centrality_info(g, beta, t_max).centrality;
}

void write_graph_json(const std::filesystem::path& path, const BrainGraph& g) {
    g.validate();
    json adj = json::array();
    for (int i = 0; i < g.n_regions(); ++i) {
        json row = json::array();
        for (int j = 0; j < g.n_regions(); ++j) row.push_back(g.adjacency(i, j));
        adj.push_back(row);
    }
    json doc = {{"labels", g.labels}, {"adjacency", adj}};
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path.string());
    f << doc.dump(1) << "\n";
}

BrainGraph read_graph_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read graph " + path.string());
    json doc;
    try {
        f >> doc;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    BrainGraph g;
    g.labels = doc.at("labels").get<std::vector<std::string>>();
    const auto& adj = doc.at("adjacency");
    const int n = static_cast<int>(adj.size());
    g.adjacency.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g.adjacency(i, j) = adj[i][j].get<double>();
    g.validate();
    return g;
}

BrainGraph default_brain_graph() {
    BrainGraph g;
    g.labels = {
        "PrefrontalCortex",  "MotorCortex",     "SomatosensoryCortex",
        "TemporalCortex",    "ParietalCortex",  "OccipitalCortex",
        "InsularCortex",     "CingulateCortex", "Hippocampus",
        "Thalamus",          "Amygdala",        "RetrotrapezoidNucleus",
        "LocusCoeruleus",    "RapheNuclei",     "NucleusTractusSolitarius",
        "Hypothalamus",
    };
    const int n = 16;
    g.adjacency = Eigen::MatrixXd::Zero(n, n);
    auto link = [&](int i, int j, double w) {
        g.adjacency(i, j) = g.adjacency(j, i) = w;
    };
    // Cortical ring with cross links.
    for (int i = 0; i < 8; ++i) link(i, (i + 1) % 8, 0.7);
    link(0, 4, 0.4);
    link(1, 5, 0.4);
    link(2, 6, 0.4);
    // Subcortical hub wiring.
    for (int c = 0; c < 8; ++c) link(c, 9, 0.5);  // thalamus to all cortex
    link(3, 8, 0.5);
    link(7, 8, 0.4);
    link(8, 10, 0.5);
    link(6, 10, 0.4);
    // Brainstem nuclei: dense internal block, strong links to subcortex.
    for (int i = 11; i < 16; ++i)
        for (int j = i + 1; j < 16; ++j) link(i, j, 1.0);
    for (int b = 11; b < 16; ++b) {
        link(b, 9, 0.6);
        link(b, 8, 0.3);
        link(b, 10, 0.3);
    }
    // Weak direct brainstem-cortex shortcuts.
    link(12, 0, 0.1);
    link(13, 7, 0.1);
    g.validate();
    return g;
}

}  // namespace gsm::graphdiff
