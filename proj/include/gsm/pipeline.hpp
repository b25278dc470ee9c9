#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gsm/config.hpp"
#include "gsm/model.hpp"

namespace gsm::pipeline {

struct SubjectBiomarkers {
    std::string subject_id;
    int label = 0;
    bool held_out = false;
    double latent_energy_entropy = 0.0;
    double attention_entropy = 0.0;
    double geodesic_mean = 0.0;
    double geodesic_max = 0.0;
    double curvature_mean = 0.0;
    std::map<signals::Modality, std::optional<double>> memory_index;
    double stroke_residual = 0.0;
    double model_prob = 0.5;
    double composite_risk = 0.5;
};

struct RunResult {
    std::vector<SubjectBiomarkers> subjects;
    Eigen::VectorXd diffusion_centrality;
    model::MetricsReport heldout;
    model::MetricsReport train;
    model::MetricsReport baseline_heldout;
    std::string config_hash;
    std::uint64_t seed = 0;
    int n_train = 0, n_test = 0;
};

// simulate: synthesize the cohort and write CSV windows + manifest under
// out_dir/cohort. Returns the manifest path.
std::filesystem::path cmd_simulate(const config::PipelineConfig& cfg);

// run: preprocess -> embed -> extract -> fuse -> train -> predict ->
// biomarkers -> metrics; writes biomarker_report.json, metrics.json and
// attention_weights.csv under out_dir.
RunResult cmd_run(const config::PipelineConfig& cfg);

struct DiffuseResult {
    std::vector<graphdiff::RiskState> trajectory;
    Eigen::VectorXd centrality;
    std::vector<std::string> labels;
};

// diffuse: brainstem-seeded fractional risk cascade on the configured
// graph; writes risk_trajectory.csv and centrality.json under out_dir.
DiffuseResult cmd_diffuse(const config::PipelineConfig& cfg);

// report: merge metrics.json files from previous runs; refuses mixed
// config hashes unless force is set. Writes summary.json under out_dir.
struct ReportResult {
    int n_runs = 0;
    double mean_auc = 0.0, mean_acc = 0.0, mean_f1 = 0.0;
};
ReportResult cmd_report(const std::vector<std::filesystem::path>& metric_files,
                        const std::filesystem::path& out_dir, bool force = false);

// Loads the configured graph, or the bundled default when no path is set.
graphdiff::BrainGraph load_graph(const config::PipelineConfig& cfg);

}  // namespace gsm::pipeline
