#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsm/manifold.hpp"

namespace gsm::signals {

enum class Modality { EEG, ECG, Resp, SpO2, EMG, FmriBold };

std::string modality_name(Modality m);
Modality modality_from_name(const std::string& name);

// Multichannel sampled signal of one modality; values is channels x samples.
struct TimeSeriesWindow {
    Modality modality = Modality::EEG;
    double sample_rate = 0.0;  // Hz
    Eigen::MatrixXd values;

    int channels() const { return static_cast<int>(values.rows()); }
    int samples() const { return static_cast<int>(values.cols()); }
    void validate() const;
};

struct LabeledRecord {
    std::string subject_id;
    std::map<Modality, TimeSeriesWindow> windows;
    int label = 0;  // binary outcome
};

struct ModalityLayout {
    int channels = 1;
    double sample_rate = 0.0;  // Hz
    double duration = 0.0;     // seconds
};

struct SyntheticCohortSpec {
    int n_subjects = 0;
    double positive_fraction = 0.0;
    double effect_size = 0.0;  // planted cross-modal coupling strength
    std::uint64_t seed = 0;
    std::map<Modality, ModalityLayout> layouts;  // empty = defaults

    void validate() const;
};

std::map<Modality, ModalityLayout> default_layouts();

struct ZscoreResult {
    TimeSeriesWindow window;
    std::vector<bool> constant_channel;  // true = degenerate, mapped to zeros
};

// Per-channel z-score with the population standard deviation. Constant
// channels become all-zero and are flagged.
ZscoreResult zscore_normalize(const TimeSeriesWindow& w);

// Zero-phase 4th-order Butterworth bandpass: two biquad sections applied
// forward and backward with odd-reflection edge padding.
TimeSeriesWindow bandpass_filter(const TimeSeriesWindow& w, double low_hz,
                                 double high_hz);

// Linear-interpolation resampling; output length rounds T * target / rate.
TimeSeriesWindow resample(const TimeSeriesWindow& w, double target_rate);

// Amplitude-threshold artifact screen: true where any channel exceeds
// `threshold` times the channel's robust scale.
bool has_artifact(const TimeSeriesWindow& w, double threshold = 8.0);

// Sample covariance of each sliding window plus shrink * I. A negative
// shrink requests the default 1e-6 * trace / channels.
std::vector<manifold::SpdMatrix> sliding_covariance(const TimeSeriesWindow& w,
                                                    int win_len, int stride,
                                                    double shrink = -1.0);
std::vector<manifold::SpdMatrix> sliding_covariance_serial(
    const TimeSeriesWindow& w, int win_len, int stride, double shrink = -1.0);

// Deterministic synthetic cohort. One counter-derived RNG stream per
// subject, so generation order never changes the data.
std::vector<LabeledRecord> generate_synthetic_cohort(
    const SyntheticCohortSpec& spec);

// CSV persistence: "# modality,<name>" and "# rate,<Hz>" headers, then one
// row per channel.
void write_window_csv(const std::filesystem::path& path,
                      const TimeSeriesWindow& w);
TimeSeriesWindow read_window_csv(const std::filesystem::path& path);

struct ManifestEntry {
    std::string subject_id;
    int label = 0;
    std::map<Modality, std::filesystem::path> files;
};

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Writes windows next to the manifest and returns its entries.
std::vector<ManifestEntry> export_cohort(const std::vector<LabeledRecord>& cohort,
                                         const std::filesystem::path& out_dir);
LabeledRecord load_record(const ManifestEntry& entry);

}  // namespace gsm::signals
