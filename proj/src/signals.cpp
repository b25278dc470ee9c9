#include "gsm/signals.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gsm/errors.hpp"

namespace gsm::signals {

namespace {

using json = nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string modality_name(Modality m) {
    switch (m) {
        case Modality::EEG: return "EEG";
        case Modality::ECG: return "ECG";
        case Modality::Resp: return "Resp";
        case Modality::SpO2: return "SpO2";
        case Modality::EMG: return "EMG";
        case Modality::FmriBold: return "fMRI-BOLD";
    }
    throw ConfigError("modality_name: unknown modality");
}

Modality modality_from_name(const std::string& name) {
    for (Modality m : {Modality::EEG, Modality::ECG, Modality::Resp,
                       Modality::SpO2, Modality::EMG, Modality::FmriBold})
        if (modality_name(m) == name) return m;
    throw DataError("unknown modality name: " + name);
}

void TimeSeriesWindow::validate() const {
    if (!(sample_rate > 0.0))
        throw DataError("TimeSeriesWindow: sample rate must be positive");
    if (values.rows() == 0 || values.cols() == 0)
        throw DataError("TimeSeriesWindow: empty values");
    if (!values.allFinite())
        throw DataError("TimeSeriesWindow: non-finite values");
}

void SyntheticCohortSpec::validate() const {
    if (n_subjects < 2)
        throw ConfigError("SyntheticCohortSpec: need at least 2 subjects");
    if (positive_fraction < 0.0 || positive_fraction > 1.0)
        throw ConfigError("SyntheticCohortSpec: positive_fraction outside [0,1]");
    if (effect_size < 0.0)
        throw ConfigError("SyntheticCohortSpec: effect_size must be >= 0");
    for (const auto& [m, l] : layouts)
        if (!(l.sample_rate > 0.0) || !(l.duration > 0.0) || l.channels < 1)
            throw ConfigError("SyntheticCohortSpec: bad layout for " +
                              modality_name(m));
}

std::map<Modality, ModalityLayout> default_layouts() {
    return {
        {Modality::EEG, {8, 512.0, 5.0}},
        {Modality::ECG, {1, 256.0, 30.0}},
        {Modality::Resp, {1, 8.0, 60.0}},
        {Modality::SpO2, {1, 8.0, 60.0}},
        {Modality::EMG, {2, 256.0, 10.0}},
        {Modality::FmriBold, {16, 0.5, 240.0}},
    };
}

ZscoreResult zscore_normalize(const TimeSeriesWindow& w) {
    w.validate();
    if (w.samples() < 2)
        throw DataError("zscore_normalize: need at least 2 samples");

    ZscoreResult res;
    res.window = w;
    res.constant_channel.assign(w.channels(), false);
    for (int c = 0; c < w.channels(); ++c) {
        const double mean = w.values.row(c).mean();
        const double var =
            (w.values.row(c).array() - mean).square().mean();  // population
        if (var <= 0.0) {
            res.window.values.row(c).setZero();
            res.constant_channel[c] = true;
        } else {
            res.window.values.row(c) =
                (w.values.row(c).array() - mean) / std::sqrt(var);
        }
    }
    return res;
}

namespace {

struct Biquad {
    // b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2
    double b0, b1, b2, a1, a2;
};

std::complex<double> biquad_response(const Biquad& s, double theta) {
    const std::complex<double> z1 = std::polar(1.0, -theta);
    const std::complex<double> z2 = z1 * z1;
    return (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
}

// 4th-order Butterworth bandpass as two biquads: order-2 analog prototype,
// bandpass transform with prewarped edges, bilinear transform, per-section
// gain normalized at the prewarped center frequency.
std::vector<Biquad> design_bandpass(double low, double high, double fs) {
    using cd = std::complex<double>;
    const double k = 2.0 * fs;
    const double wl = k * std::tan(M_PI * low / fs);
    const double wh = k * std::tan(M_PI * high / fs);
    const double w0 = std::sqrt(wl * wh);
    const double bw = wh - wl;

    // Prototype poles exp(i 3pi/4) and its conjugate; each maps to a pair
    // of analog bandpass poles via s^2 - bw*p*s + w0^2 = 0.
    std::vector<cd> analog;
    for (const cd p : {std::polar(1.0, 3.0 * M_PI / 4.0),
                       std::polar(1.0, -3.0 * M_PI / 4.0)}) {
        const cd disc = std::sqrt(bw * bw * p * p - 4.0 * w0 * w0);
        analog.push_back((bw * p + disc) / 2.0);
        analog.push_back((bw * p - disc) / 2.0);
    }

    std::vector<cd> digital;
    for (const cd s : analog) digital.push_back((k + s) / (k - s));

    // Pair each pole with its conjugate partner.
    std::vector<bool> used(digital.size(), false);
    std::vector<Biquad> sections;
    const double theta0 = 2.0 * std::atan(w0 / k);
    for (std::size_t i = 0; i < digital.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        std::size_t best = i;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = i + 1; j < digital.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(digital[j] - std::conj(digital[i]));
            if (d < best_d) { best_d = d; best = j; }
        }
        used[best] = true;
        const cd p1 = digital[i], p2 = digital[best];
        Biquad s{1.0, 0.0, -1.0, -(p1 + p2).real(), (p1 * p2).real()};
        const double g = std::abs(biquad_response(s, theta0));
        if (g <= 0.0) throw NumericError("design_bandpass: degenerate section");
        s.b0 /= g;
        s.b2 /= g;
        sections.push_back(s);
    }
    return sections;
}

void biquad_inplace(const Biquad& s, std::vector<double>& x) {
    double z1 = 0.0, z2 = 0.0;  // direct form II transposed
    for (double& v : x) {
        const double in = v;
        v = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * v + z2;
        z2 = s.b2 * in - s.a2 * v;
    }
}

}  // namespace

TimeSeriesWindow bandpass_filter(const TimeSeriesWindow& w, double low_hz,
                                 double high_hz) {
    w.validate();
    const double nyq = w.sample_rate / 2.0;
    if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < nyq))
        throw ConfigError("bandpass_filter: need 0 < low < high < Nyquist");

    const std::vector<Biquad> sections =
        design_bandpass(low_hz, high_hz, w.sample_rate);

    const int t = w.samples();
    const int padlen =
        std::min(t - 1, static_cast<int>(std::ceil(3.0 * w.sample_rate / low_hz)));

    TimeSeriesWindow out = w;
    for (int c = 0; c < w.channels(); ++c) {
        // Odd-reflection extension on both ends.
        std::vector<double> x(t + 2 * padlen);
        for (int i = 0; i < padlen; ++i)
            x[i] = 2.0 * w.values(c, 0) - w.values(c, padlen - i);
        for (int i = 0; i < t; ++i) x[padlen + i] = w.values(c, i);
        for (int i = 0; i < padlen; ++i)
            x[padlen + t + i] = 2.0 * w.values(c, t - 1) - w.values(c, t - 2 - i);

        for (const Biquad& s : sections) biquad_inplace(s, x);
        std::reverse(x.begin(), x.end());
        for (const Biquad& s : sections) biquad_inplace(s, x);
        std::reverse(x.begin(), x.end());

        for (int i = 0; i < t; ++i) out.values(c, i) = x[padlen + i];
    }
    return out;
}

TimeSeriesWindow resample(const TimeSeriesWindow& w, double target_rate) {
    w.validate();
    if (!(target_rate > 0.0))
        throw ConfigError("resample: target rate must be positive");
    if (w.samples() < 2) throw DataError("resample: need at least 2 samples");

    const int t_in = w.samples();
    const int t_out = static_cast<int>(
        std::llround(double(t_in) * target_rate / w.sample_rate));
    if (t_out < 1) throw ConfigError("resample: target rate too low");

    TimeSeriesWindow out;
    out.modality = w.modality;
    out.sample_rate = target_rate;
    out.values.resize(w.channels(), t_out);
    const double step = w.sample_rate / target_rate;
    for (int i = 0; i < t_out; ++i) {
        const double u = std::min(double(i) * step, double(t_in - 1));
        const int lo = static_cast<int>(u);
        const int hi = std::min(lo + 1, t_in - 1);
        const double frac = u - lo;
        out.values.col(i) =
            (1.0 - frac) * w.values.col(lo) + frac * w.values.col(hi);
    }
    return out;
}

bool has_artifact(const TimeSeriesWindow& w, double threshold) {
    w.validate();
    for (int c = 0; c < w.channels(); ++c) {
        const double mean = w.values.row(c).mean();
        const double sd = std::sqrt(
            (w.values.row(c).array() - mean).square().mean());
        if (sd <= 0.0) continue;
        if ((w.values.row(c).array() - mean).abs().maxCoeff() > threshold * sd)
            return true;
    }
    return false;
}

namespace {

std::vector<manifold::SpdMatrix> sliding_cov_impl(const TimeSeriesWindow& w,
                                                  int win_len, int stride,
                                                  double shrink, bool parallel) {
    w.validate();
    if (win_len < 2 || win_len > w.samples())
        throw DataError("sliding_covariance: window length outside [2, T]");
    if (stride < 1) throw ConfigError("sliding_covariance: stride must be >= 1");

    const int c = w.channels();
    const int n_win = (w.samples() - win_len) / stride + 1;
    std::vector<Eigen::MatrixXd> raw(n_win);

#pragma omp parallel for schedule(static) if (parallel)
    for (int k = 0; k < n_win; ++k) {
        const Eigen::MatrixXd block = w.values.middleCols(k * stride, win_len);
        const Eigen::VectorXd mean = block.rowwise().mean();
        const Eigen::MatrixXd centered = block.colwise() - mean;
        Eigen::MatrixXd cov =
            centered * centered.transpose() / double(win_len - 1);
        const double eps =
            shrink >= 0.0 ? shrink : 1e-6 * cov.trace() / double(c);
        cov += std::max(eps, 1e-12) * Eigen::MatrixXd::Identity(c, c);
        raw[k] = cov;
    }

    std::vector<manifold::SpdMatrix> out;
    out.reserve(n_win);
    for (auto& m : raw) out.emplace_back(std::move(m));
    return out;
}

}  // namespace

std::vector<manifold::SpdMatrix> sliding_covariance(const TimeSeriesWindow& w,
                                                    int win_len, int stride,
                                                    double shrink) {
    return sliding_cov_impl(w, win_len, stride, shrink, true);
}

std::vector<manifold::SpdMatrix> sliding_covariance_serial(
    const TimeSeriesWindow& w, int win_len, int stride, double shrink) {
    return sliding_cov_impl(w, win_len, stride, shrink, false);
}

namespace {

// Planted positive-class effects, all scaled by effect_size:
//  - a shared latent drive mixed into both EEG and ECG,
//  - slower SpO2 desaturation recovery,
//  - elevated baseline and variance on the brainstem BOLD rows.
struct SubjectGen {
    std::mt19937_64 rng;
    std::normal_distribution<double> gauss{0.0, 1.0};
    double effect;  // 0 for negatives

    double n() { return gauss(rng); }
    double u() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
};

std::vector<double> make_drive(SubjectGen& g, double fs, int t) {
    // Cardiac-band oscillation with a slowly wandering envelope.
    const double phase = 2.0 * M_PI * g.u();
    std::vector<double> d(t);
    double env = 1.0;
    for (int i = 0; i < t; ++i) {
        env = 0.999 * env + 0.03 * g.n();
        d[i] = std::sin(2.0 * M_PI * 1.1 * double(i) / fs + phase) *
               (1.0 + 0.3 * env);
    }
    return d;
}

Eigen::MatrixXd gen_eeg(SubjectGen& g, const ModalityLayout& l,
                        const std::vector<double>& drive) {
    const int t = static_cast<int>(l.sample_rate * l.duration);
    Eigen::MatrixXd x(l.channels, t);
    const double r = 0.98;
    const double a1 = 2.0 * r * std::cos(2.0 * M_PI * 10.0 / l.sample_rate);
    const double a2 = -r * r;
    const double drive_gain = 0.15 + 0.6 * g.effect;
    for (int c = 0; c < l.channels; ++c) {
        const double loading = 0.5 + 0.5 * g.u();
        double x1 = 0.0, x2 = 0.0;
        for (int i = 0; i < t; ++i) {
            const double v = a1 * x1 + a2 * x2 + g.n();
            x2 = x1;
            x1 = v;
            const int di = i * int(drive.size()) / t;
            x(c, i) = v + drive_gain * loading * drive[di] * 3.0;
        }
    }
    return x;
}

Eigen::MatrixXd gen_ecg(SubjectGen& g, const ModalityLayout& l,
                        const std::vector<double>& drive) {
    const int t = static_cast<int>(l.sample_rate * l.duration);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(l.channels, t);
    const double mod_gain = 0.08 + 0.25 * g.effect;
    // Integrate-and-fire beat generator; rate modulated by the shared drive.
    double phase = g.u();
    const double width = 0.03 * l.sample_rate;
    for (int i = 0; i < t; ++i) {
        const int di = i * int(drive.size()) / t;
        const double hr = 1.1 * (1.0 + mod_gain * drive[di]) + 0.01 * g.n();
        phase += hr / l.sample_rate;
        if (phase >= 1.0) {
            phase -= 1.0;
            // R-peak as a narrow Gaussian bump.
            for (int j = std::max(0, i - int(4 * width));
                 j < std::min(t, i + int(4 * width) + 1); ++j) {
                const double dd = (j - i) / width;
                for (int c = 0; c < l.channels; ++c)
                    x(c, j) += std::exp(-0.5 * dd * dd);
            }
        }
    }
    for (int c = 0; c < l.channels; ++c)
        for (int i = 0; i < t; ++i) x(c, i) += 0.02 * g.n();
    return x;
}

Eigen::MatrixXd gen_resp(SubjectGen& g, const ModalityLayout& l) {
    const int t = static_cast<int>(l.sample_rate * l.duration);
    Eigen::MatrixXd x(l.channels, t);
    for (int c = 0; c < l.channels; ++c) {
        const double phase = 2.0 * M_PI * g.u();
        const double f = 0.22 + 0.06 * g.u();
        for (int i = 0; i < t; ++i)
            x(c, i) = std::sin(2.0 * M_PI * f * double(i) / l.sample_rate + phase) +
                      0.1 * g.n();
    }
    return x;
}

Eigen::MatrixXd gen_spo2(SubjectGen& g, const ModalityLayout& l) {
    const int t = static_cast<int>(l.sample_rate * l.duration);
    Eigen::MatrixXd x(l.channels, t);
    const double tau = 1.5 * (1.0 + 1.5 * g.effect);  // recovery seconds
    for (int c = 0; c < l.channels; ++c) {
        std::vector<double> desat(t, 0.0);
        double next_event = 5.0 + 10.0 * g.u();
        for (int i = 0; i < t; ++i) {
            const double tsec = double(i) / l.sample_rate;
            if (tsec >= next_event) {
                const double depth = 2.0 + 2.0 * g.u();
                for (int j = i; j < t; ++j) {
                    const double dt = double(j - i) / l.sample_rate;
                    desat[j] += depth * std::exp(-dt / tau);
                }
                next_event += 8.0 + 10.0 * g.u();
            }
        }
        for (int i = 0; i < t; ++i)
            x(c, i) = 97.0 - desat[i] + 0.15 * g.n();
    }
    return x;
}

Eigen::MatrixXd gen_emg(SubjectGen& g, const ModalityLayout& l) {
    const int t = static_cast<int>(l.sample_rate * l.duration);
    Eigen::MatrixXd x(l.channels, t);
    for (int c = 0; c < l.channels; ++c) {
        double burst_until = -1.0;
        double next_burst = 2.0 * g.u();
        for (int i = 0; i < t; ++i) {
            const double tsec = double(i) / l.sample_rate;
            if (tsec >= next_burst) {
                burst_until = tsec + 0.2 + 0.3 * g.u();
                next_burst = tsec + 1.0 + 2.0 * g.u();
            }
            const double env = tsec < burst_until ? 1.0 : 0.2;
            x(c, i) = env * g.n();
        }
    }
    return x;
}

Eigen::MatrixXd gen_bold(SubjectGen& g, const ModalityLayout& l) {
    const int t = static_cast<int>(l.sample_rate * l.duration);
    const int n_regions = l.channels;
    const int latent_dim = 3;
    Eigen::MatrixXd loadings(n_regions, latent_dim);
    for (int i = 0; i < n_regions; ++i)
        for (int j = 0; j < latent_dim; ++j) loadings(i, j) = g.n();

    Eigen::VectorXd z = Eigen::VectorXd::Zero(latent_dim);
    Eigen::MatrixXd x(n_regions, t);
    // Bundled 16-region layout keeps the 5 brainstem nuclei as the last rows.
    const int brainstem_from = std::max(0, n_regions - 5);
    const double bs_shift = 0.4 + 0.8 * g.effect;
    const double bs_noise = 0.3 + 0.6 * g.effect;
    for (int i = 0; i < t; ++i) {
        for (int j = 0; j < latent_dim; ++j)
            z[j] = 0.9 * z[j] + 0.3 * g.n();
        x.col(i) = loadings * z;
        for (int r = 0; r < n_regions; ++r) {
            x(r, i) += 0.3 * g.n();
            if (r >= brainstem_from) x(r, i) += bs_shift + bs_noise * g.n();
        }
    }
    return x;
}

}  // namespace

std::vector<LabeledRecord> generate_synthetic_cohort(
    const SyntheticCohortSpec& spec) {
    spec.validate();
    const auto layouts = spec.layouts.empty() ? default_layouts() : spec.layouts;
    const int n_pos =
        static_cast<int>(std::lround(spec.n_subjects * spec.positive_fraction));

    std::vector<LabeledRecord> cohort(spec.n_subjects);
    for (int i = 0; i < spec.n_subjects; ++i) {
        LabeledRecord& rec = cohort[i];
        rec.label = i < n_pos ? 1 : 0;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "subj_%03d", i);
        rec.subject_id = idbuf;

        SubjectGen g{std::mt19937_64(splitmix64(spec.seed + 1) ^
                                     splitmix64(0x5D23C9B5ULL * (i + 1))),
                     {}, rec.label ? spec.effect_size : 0.0};

        // Drive sampled at EEG rate; other modalities index into it.
        const auto eeg_it = layouts.find(Modality::EEG);
        const ModalityLayout eeg_l =
            eeg_it != layouts.end() ? eeg_it->second : ModalityLayout{8, 512, 5};
        const std::vector<double> drive = make_drive(
            g, eeg_l.sample_rate,
            static_cast<int>(eeg_l.sample_rate * eeg_l.duration));

        for (const auto& [m, l] : layouts) {
            TimeSeriesWindow w;
            w.modality = m;
            w.sample_rate = l.sample_rate;
            switch (m) {
                case Modality::EEG: w.values = gen_eeg(g, l, drive); break;
                case Modality::ECG: w.values = gen_ecg(g, l, drive); break;
                case Modality::Resp: w.values = gen_resp(g, l); break;
                case Modality::SpO2: w.values = gen_spo2(g, l); break;
                case Modality::EMG: w.values = gen_emg(g, l); break;
                case Modality::FmriBold: w.values = gen_bold(g, l); break;
            }
            rec.windows[m] = std::move(w);
        }
    }
    return cohort;
}

void write_window_csv(const std::filesystem::path& path,
                      const TimeSeriesWindow& w) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path.string());
    f << "# modality," << modality_name(w.modality) << "\n";
    f << "# rate," << fmt_double(w.sample_rate) << "\n";
    for (int c = 0; c < w.channels(); ++c) {
        for (int i = 0; i < w.samples(); ++i) {
            if (i) f << ',';
            f << fmt_double(w.values(c, i));
        }
        f << '\n';
    }
}

TimeSeriesWindow read_window_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read " + path.string());
    TimeSeriesWindow w;
    std::string line;
    std::vector<std::vector<double>> rows;
    bool have_modality = false, have_rate = false;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw DataError(path.string() + ": malformed header line");
            const std::string key = line.substr(2, comma - 2);
            const std::string val = line.substr(comma + 1);
            if (key == "modality") {
                w.modality = modality_from_name(val);
                have_modality = true;
            } else if (key == "rate") {
                w.sample_rate = std::stod(val);
                have_rate = true;
            }
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows[0].size())
            throw DataError(path.string() + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (!have_modality || !have_rate || rows.empty())
        throw DataError(path.string() + ": missing header or data");
    w.values.resize(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            w.values(r, c) = rows[r][c];
    w.validate();
    return w;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries) {
    json arr = json::array();
    for (const auto& e : entries) {
        json files = json::object();
        for (const auto& [m, p] : e.files) files[modality_name(m)] = p.string();
        arr.push_back({{"subject_id", e.subject_id},
                       {"label", e.label},
                       {"files", files}});
    }
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path.string());
    f << arr.dump(2) << "\n";
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read manifest " + path.string());
    json arr;
    try {
        f >> arr;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    std::vector<ManifestEntry> out;
    for (const auto& item : arr) {
        ManifestEntry e;
        e.subject_id = item.at("subject_id").get<std::string>();
        e.label = item.at("label").get<int>();
        for (const auto& [name, p] : item.at("files").items())
            e.files[modality_from_name(name)] = p.get<std::string>();
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ManifestEntry> export_cohort(const std::vector<LabeledRecord>& cohort,
                                         const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<ManifestEntry> entries;
    for (const auto& rec : cohort) {
        ManifestEntry e;
        e.subject_id = rec.subject_id;
        e.label = rec.label;
        for (const auto& [m, w] : rec.windows) {
            std::string name = modality_name(m);
            std::replace(name.begin(), name.end(), '-', '_');
            const auto p = out_dir / (rec.subject_id + "_" + name + ".csv");
            write_window_csv(p, w);
            e.files[m] = p;
        }
        entries.push_back(std::move(e));
    }
    write_manifest(out_dir / "manifest.json", entries);
    return entries;
}

LabeledRecord load_record(const ManifestEntry& entry) {
    LabeledRecord rec;
    rec.subject_id = entry.subject_id;
    rec.label = entry.label;
    for (const auto& [m, p] : entry.files) {
        TimeSeriesWindow w = read_window_csv(p);
        if (w.modality != m)
            throw DataError(p.string() + ": modality does not match manifest");
        rec.windows[m] = std::move(w);
    }
    return rec;
}

}  // namespace gsm::signals
