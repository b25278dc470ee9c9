#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace gsm::config {

struct Band {
    double low = 0.0;
    double high = 0.0;
};

// Flat key=value config with [section] headers. Unknown keys are rejected.
struct PipelineConfig {
    // [paths]
    std::filesystem::path manifest;
    std::filesystem::path graph;    // empty = bundled 16-region connectome
    std::filesystem::path out_dir = "out";

    // [cohort]
    int n_subjects = 60;
    double positive_fraction = 0.5;
    double effect_size = 2.0;

    // [preprocess]
    Band eeg_band{1.0, 40.0};
    Band ecg_band{0.5, 40.0};
    Band emg_band{20.0, 100.0};
    Band resp_band{0.05, 1.0};
    Band spo2_band{0.02, 0.5};
    double cov_window_sec = 1.0;
    double cov_stride_sec = 0.5;
    double cov_shrink = -1.0;  // negative = 1e-6 * trace / channels
    double artifact_threshold = 8.0;

    // [model]
    int d_model = 16;
    int heads = 2;
    int d_k = 16;
    int epochs = 150;
    double lr = 0.5;
    double train_fraction = 0.7;
    double threshold = 0.5;

    // [loss]
    double lambda_att = 0.01;
    double lambda_stroke = 0.1;
    double entropy_sign = 1.0;

    // [diffusion]
    double alpha = 0.9;
    double beta = 0.05;
    double gamma = 0.02;
    double horizon = 60.0;  // minutes
    double step = 0.05;
    int discrete_steps = 24;
    int centrality_walk = 8;

    // [run]
    std::uint64_t seed = 1;
    int workers = 1;

    // Deterministic canonical text; the config hash is computed from it.
    std::string canonical() const;
    std::string hash_hex() const;
    void validate() const;
};

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& cfg);

std::uint64_t fnv1a64(const std::string& data);

}  // namespace gsm::config
