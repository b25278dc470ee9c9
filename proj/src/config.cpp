#include "gsm/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "gsm/errors.hpp"

namespace gsm::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
    // Shortest representation that parses back to the same double.
    char buf[32];
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

struct Field {
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

std::map<std::string, Field> field_table() {
    std::map<std::string, Field> t;
    auto add_d = [&](const std::string& key, double PipelineConfig::* m) {
        t[key] = {[m](PipelineConfig& c, const std::string& v) { c.*m = std::stod(v); },
                  [m](const PipelineConfig& c) { return fmt(c.*m); }};
    };
    auto add_i = [&](const std::string& key, int PipelineConfig::* m) {
        t[key] = {[m](PipelineConfig& c, const std::string& v) { c.*m = std::stoi(v); },
                  [m](const PipelineConfig& c) { return std::to_string(c.*m); }};
    };
    auto add_p = [&](const std::string& key,
                     std::filesystem::path PipelineConfig::* m) {
        t[key] = {[m](PipelineConfig& c, const std::string& v) { c.*m = v; },
                  [m](const PipelineConfig& c) { return (c.*m).string(); }};
    };
    auto add_band = [&](const std::string& prefix, Band PipelineConfig::* m) {
        t[prefix + "_low"] = {
            [m](PipelineConfig& c, const std::string& v) { (c.*m).low = std::stod(v); },
            [m](const PipelineConfig& c) { return fmt((c.*m).low); }};
        t[prefix + "_high"] = {
            [m](PipelineConfig& c, const std::string& v) { (c.*m).high = std::stod(v); },
            [m](const PipelineConfig& c) { return fmt((c.*m).high); }};
    };

    add_p("paths.manifest", &PipelineConfig::manifest);
    add_p("paths.graph", &PipelineConfig::graph);
    add_p("paths.out", &PipelineConfig::out_dir);
    add_i("cohort.n_subjects", &PipelineConfig::n_subjects);
    add_d("cohort.positive_fraction", &PipelineConfig::positive_fraction);
    add_d("cohort.effect_size", &PipelineConfig::effect_size);
    add_band("preprocess.eeg_band", &PipelineConfig::eeg_band);
    add_band("preprocess.ecg_band", &PipelineConfig::ecg_band);
    add_band("preprocess.emg_band", &PipelineConfig::emg_band);
    add_band("preprocess.resp_band", &PipelineConfig::resp_band);
    add_band("preprocess.spo2_band", &PipelineConfig::spo2_band);
    add_d("preprocess.cov_window_sec", &PipelineConfig::cov_window_sec);
    add_d("preprocess.cov_stride_sec", &PipelineConfig::cov_stride_sec);
    add_d("preprocess.cov_shrink", &PipelineConfig::cov_shrink);
    add_d("preprocess.artifact_threshold", &PipelineConfig::artifact_threshold);
    add_i("model.d_model", &PipelineConfig::d_model);
    add_i("model.heads", &PipelineConfig::heads);
    add_i("model.d_k", &PipelineConfig::d_k);
    add_i("model.epochs", &PipelineConfig::epochs);
    add_d("model.lr", &PipelineConfig::lr);
    add_d("model.train_fraction", &PipelineConfig::train_fraction);
    add_d("model.threshold", &PipelineConfig::threshold);
    add_d("loss.lambda_att", &PipelineConfig::lambda_att);
    add_d("loss.lambda_stroke", &PipelineConfig::lambda_stroke);
    add_d("loss.entropy_sign", &PipelineConfig::entropy_sign);
    add_d("diffusion.alpha", &PipelineConfig::alpha);
    add_d("diffusion.beta", &PipelineConfig::beta);
    add_d("diffusion.gamma", &PipelineConfig::gamma);
    add_d("diffusion.horizon", &PipelineConfig::horizon);
    add_d("diffusion.step", &PipelineConfig::step);
    add_i("diffusion.discrete_steps", &PipelineConfig::discrete_steps);
    add_i("diffusion.centrality_walk", &PipelineConfig::centrality_walk);
    t["run.seed"] = {
        [](PipelineConfig& c, const std::string& v) { c.seed = std::stoull(v); },
        [](const PipelineConfig& c) { return std::to_string(c.seed); }};
    add_i("run.workers", &PipelineConfig::workers);
    return t;
}

}  // namespace

std::string PipelineConfig::canonical() const {
    std::ostringstream os;
    for (const auto& [key, field] : field_table())
        os << key << "=" << field.get(*this) << "\n";
    return os.str();
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string PipelineConfig::hash_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical())));
    return buf;
}

void PipelineConfig::validate() const {
    if (n_subjects < 2) throw ConfigError("cohort.n_subjects must be >= 2");
    if (positive_fraction < 0.0 || positive_fraction > 1.0)
        throw ConfigError("cohort.positive_fraction outside [0,1]");
    if (effect_size < 0.0) throw ConfigError("cohort.effect_size must be >= 0");
    for (const Band* b : {&eeg_band, &ecg_band, &emg_band, &resp_band, &spo2_band})
        if (!(b->low > 0.0) || !(b->low < b->high))
            throw ConfigError("preprocess band needs 0 < low < high");
    if (!(cov_window_sec > 0.0) || !(cov_stride_sec > 0.0))
        throw ConfigError("preprocess covariance window/stride must be positive");
    if (d_model < 1 || heads < 1 || d_k < 1)
        throw ConfigError("model dimensions must be positive");
    if (epochs < 0 || lr < 0.0) throw ConfigError("model.epochs/lr must be >= 0");
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw ConfigError("model.train_fraction must be in (0,1)");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw ConfigError("diffusion.alpha must be in (0,1]");
    if (beta < 0.0 || gamma < 0.0)
        throw ConfigError("diffusion.beta/gamma must be >= 0");
    if (!(horizon > 0.0) || !(step > 0.0))
        throw ConfigError("diffusion.horizon/step must be positive");
    if (discrete_steps < 3)
        throw ConfigError("diffusion.discrete_steps must be >= 3");
    if (centrality_walk < 1)
        throw ConfigError("diffusion.centrality_walk must be >= 1");
    if (workers < 1) throw ConfigError("run.workers must be >= 1");
    if (lambda_att < 0.0 || lambda_stroke < 0.0)
        throw ConfigError("loss lambdas must be >= 0");
    if (entropy_sign != 1.0 && entropy_sign != -1.0)
        throw ConfigError("loss.entropy_sign must be +1 or -1");
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path.string());
    const auto table = field_table();
    PipelineConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected key=value");
        const std::string key =
            (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const auto it = table.find(key);
        if (it == table.end())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
        try {
            it->second.set(cfg, val);
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": bad value for '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

void save_config(const std::filesystem::path& path, const PipelineConfig& cfg) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write config " + path.string());
    std::string last_section;
    for (const auto& [key, field] : field_table()) {
        const auto dot = key.find('.');
        const std::string section = key.substr(0, dot);
        if (section != last_section) {
            if (!last_section.empty()) f << "\n";
            f << "[" << section << "]\n";
            last_section = section;
        }
        f << key.substr(dot + 1) << " = " << field.get(cfg) << "\n";
    }
}

}  // namespace gsm::config
