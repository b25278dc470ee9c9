#include "gsm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "gsm/errors.hpp"
#include "gsm/hamiltonian.hpp"

namespace gsm::pipeline {

namespace {

using json = nlohmann::json;
using signals::Modality;

const std::vector<Modality> kModalityOrder = {
    Modality::EEG,  Modality::ECG, Modality::Resp,
    Modality::SpO2, Modality::EMG, Modality::FmriBold,
};

bool is_brainstem_label(const std::string& label) {
    for (const char* key :
         {"Retrotrapezoid", "LocusCoeruleus", "Raphe", "NucleusTractus",
          "Hypothalamus"})
        if (label.find(key) != std::string::npos) return true;
    return false;
}

config::Band band_for(const config::PipelineConfig& cfg, Modality m) {
    switch (m) {
        case Modality::EEG: return cfg.eeg_band;
        case Modality::ECG: return cfg.ecg_band;
        case Modality::EMG: return cfg.emg_band;
        case Modality::Resp: return cfg.resp_band;
        case Modality::SpO2: return cfg.spo2_band;
        default: return {0.0, 0.0};
    }
}

struct SubjectData {
    SubjectBiomarkers bio;
    std::vector<Eigen::VectorXd> embeddings;
    std::vector<bool> present;
};

// Fixed 8-node energy model: two cortical nodes, the five brainstem
// nuclei, one cardiac node.
hamiltonian::EnergyModel make_energy_model() {
    using hamiltonian::BrainstemNucleus;
    using hamiltonian::Subsystem;
    hamiltonian::EnergyModel m;
    const int n = 8;
    m.mass = Eigen::VectorXd::Ones(n);
    m.stiffness = Eigen::MatrixXd::Identity(n, n);
    m.coupling = Eigen::MatrixXd::Zero(n, n);
    m.labels = {
        {Subsystem::Cortical, BrainstemNucleus::None},
        {Subsystem::Cortical, BrainstemNucleus::None},
        {Subsystem::Brainstem, BrainstemNucleus::Retrotrapezoid},
        {Subsystem::Brainstem, BrainstemNucleus::LocusCoeruleus},
        {Subsystem::Brainstem, BrainstemNucleus::Raphe},
        {Subsystem::Brainstem, BrainstemNucleus::NucleusTractusSolitarius},
        {Subsystem::Brainstem, BrainstemNucleus::Hypothalamus},
        {Subsystem::Cardiac, BrainstemNucleus::None},
    };
    auto couple = [&](int i, int j, double w) {
        m.coupling(i, j) = m.coupling(j, i) = w;
    };
    for (int c = 0; c < 2; ++c)
        for (int b = 2; b < 7; ++b) couple(c, b, 0.15);
    for (int b = 2; b < 7; ++b) couple(b, 7, 0.25);
    couple(0, 7, 0.1);
    couple(1, 7, 0.1);
    m.validate();
    return m;
}

double subject_energy_entropy(const signals::LabeledRecord& raw,
                              const hamiltonian::EnergyModel& em) {
    Eigen::VectorXd q0 = Eigen::VectorXd::Constant(em.dim(), 0.1);
    auto rms_of = [](const Eigen::MatrixXd& v, int row) {
        return std::sqrt(v.row(row).array().square().mean());
    };
    if (auto it = raw.windows.find(Modality::EEG); it != raw.windows.end()) {
        const auto& v = it->second.values;
        const int half = std::max(1, int(v.rows()) / 2);
        double a = 0.0, b = 0.0;
        for (int r = 0; r < v.rows(); ++r)
            (r < half ? a : b) += rms_of(v, r);
        q0[0] = std::log1p(a / half);
        q0[1] = std::log1p(b / std::max(1, int(v.rows()) - half));
    }
    if (auto it = raw.windows.find(Modality::FmriBold); it != raw.windows.end()) {
        const auto& v = it->second.values;
        const int bs_from = std::max(0, int(v.rows()) - 5);
        for (int k = 0; k < 5 && bs_from + k < v.rows(); ++k) {
            const Eigen::VectorXd row = v.row(bs_from + k);
            const double sd =
                std::sqrt((row.array() - row.mean()).square().mean());
            q0[2 + k] = std::log1p(sd);
        }
    }
    if (auto it = raw.windows.find(Modality::ECG); it != raw.windows.end())
        q0[7] = std::log1p(rms_of(it->second.values, 0));

    hamiltonian::HamiltonianState s0{q0, Eigen::VectorXd::Zero(em.dim())};
    const auto traj = hamiltonian::symplectic_integrate(s0, em, 0.05, 200);
    std::vector<double> parts(3, 0.0);
    for (const auto& s : traj) {
        const auto d = hamiltonian::total_energy(s, em);
        for (int k = 0; k < 3; ++k) parts[k] += std::max(d.parts[k], 0.0);
    }
    return hamiltonian::latent_energy_entropy(parts);
}

Eigen::VectorXd bold_risk_seed(const signals::LabeledRecord& raw,
                               const graphdiff::BrainGraph& g) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(g.n_regions());
    const auto it = raw.windows.find(Modality::FmriBold);
    if (it == raw.windows.end()) return x0;
    const auto& v = it->second.values;
    const int n = std::min<int>(g.n_regions(), int(v.rows()));
    for (int r = 0; r < n; ++r) {
        const Eigen::VectorXd row = v.row(r);
        x0[r] = std::sqrt((row.array() - row.mean()).square().mean());
    }
    const double mx = x0.maxCoeff();
    if (mx > 0.0) x0 /= mx;
    return x0;
}

SubjectData process_subject(const signals::ManifestEntry& entry,
                            const config::PipelineConfig& cfg,
                            const graphdiff::BrainGraph& graph,
                            const model::ExtractorBank& bank,
                            const hamiltonian::EnergyModel& em) {
    const signals::LabeledRecord raw = signals::load_record(entry);

    SubjectData sd;
    sd.bio.subject_id = raw.subject_id;
    sd.bio.label = raw.label;

    // Preprocess: bandpass (where configured) then z-score; artifact
    // windows drop the modality.
    std::map<Modality, signals::TimeSeriesWindow> clean;
    for (const auto& [m, w] : raw.windows) {
        signals::TimeSeriesWindow cur = w;
        const config::Band band = band_for(cfg, m);
        if (band.high > band.low && band.high < cur.sample_rate / 2.0)
            cur = signals::bandpass_filter(cur, band.low, band.high);
        if (signals::has_artifact(cur, cfg.artifact_threshold)) continue;
        clean[m] = signals::zscore_normalize(cur).window;
    }

    // Geometry biomarkers from EEG sliding covariances.
    if (auto it = clean.find(Modality::EEG); it != clean.end()) {
        const auto& w = it->second;
        const int win = std::max(
            2, int(std::lround(cfg.cov_window_sec * w.sample_rate)));
        const int stride = std::max(
            1, int(std::lround(cfg.cov_stride_sec * w.sample_rate)));
        if (win <= w.samples()) {
            const auto covs =
                signals::sliding_covariance(w, win, stride, cfg.cov_shrink);
            const auto emb = manifold::embed_modality(covs, "EEG");
            const auto fm = manifold::frechet_mean_info(emb.points, 1e-9, 100);
            double acc = 0.0, mx = 0.0;
            for (const auto& p : emb.points) {
                const double d = manifold::geodesic_distance(fm.mean, p);
                acc += d;
                mx = std::max(mx, d);
            }
            sd.bio.geodesic_mean = acc / double(emb.points.size());
            sd.bio.geodesic_max = mx;

            double cacc = 0.0;
            int ccount = 0;
            const std::size_t np = emb.points.size();
            for (std::size_t k = 0; k + 2 < np && ccount < 8; k += 3) {
                try {
                    cacc += manifold::curvature_proxy(
                        emb.points[k], emb.points[k + 1], emb.points[k + 2]);
                    ++ccount;
                } catch (const DataError&) {
                    // coincident windows, skip the triple
                }
            }
            if (ccount) sd.bio.curvature_mean = cacc / ccount;
        }
    }

    // Long-memory index per modality where the series is long enough.
    for (const Modality m : kModalityOrder) {
        const auto it = clean.find(m);
        if (it == clean.end() || it->second.samples() < 256) {
            sd.bio.memory_index[m] = std::nullopt;
            continue;
        }
        std::vector<double> series(it->second.samples());
        for (int i = 0; i < it->second.samples(); ++i)
            series[i] = it->second.values(0, i);
        try {
            sd.bio.memory_index[m] = fractional::memory_index(series);
        } catch (const DataError&) {
            sd.bio.memory_index[m] = std::nullopt;
        }
    }

    // Fixed random-feature embeddings per modality.
    for (const Modality m : kModalityOrder) {
        const auto it = clean.find(m);
        if (it == clean.end()) {
            sd.embeddings.push_back(Eigen::VectorXd::Zero(cfg.d_model));
            sd.present.push_back(false);
        } else {
            sd.embeddings.push_back(bank.embed(it->second));
            sd.present.push_back(true);
        }
    }

    sd.bio.latent_energy_entropy = subject_energy_entropy(raw, em);

    // Stroke surrogate trajectory and its diffusion-consistency residual.
    const Eigen::VectorXd x0 = bold_risk_seed(raw, graph);
    if (x0.maxCoeff() > 0.0) {
        std::vector<graphdiff::RiskState> traj{{x0, 0.0}};
        const Eigen::MatrixXd w_gcn =
            cfg.beta * Eigen::MatrixXd::Identity(graph.n_regions(),
                                                 graph.n_regions());
        const Eigen::VectorXd b_gcn = Eigen::VectorXd::Zero(graph.n_regions());
        for (int s = 0; s < cfg.discrete_steps; ++s)
            traj.push_back(graphdiff::discrete_gcn_diffusion(
                traj.back(), graph, w_gcn, b_gcn, cfg.gamma,
                graphdiff::Activation::Relu));
        sd.bio.stroke_residual = model::diffusion_residual(
            traj, graph, cfg.alpha, cfg.beta, cfg.gamma);
    }
    return sd;
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path.string());
    f << doc.dump(1) << "\n";
}

json metrics_json(const model::MetricsReport& r) {
    return {{"acc", r.acc},       {"auc", r.auc},
            {"f1", r.f1},         {"precision", r.precision},
            {"recall", r.recall}, {"tp", r.tp},
            {"fp", r.fp},         {"fn", r.fn},
            {"tn", r.tn},         {"degenerate", r.degenerate}};
}

model::MetricsReport metrics_from_json(const json& j) {
    model::MetricsReport r;
    r.acc = j.at("acc");
    r.auc = j.at("auc");
    r.f1 = j.at("f1");
    r.precision = j.at("precision");
    r.recall = j.at("recall");
    r.tp = j.at("tp");
    r.fp = j.at("fp");
    r.fn = j.at("fn");
    r.tn = j.at("tn");
    r.degenerate = j.at("degenerate");
    return r;
}

}  // namespace

graphdiff::BrainGraph load_graph(const config::PipelineConfig& cfg) {
    if (cfg.graph.empty()) return graphdiff::default_brain_graph();
    return graphdiff::read_graph_json(cfg.graph);
}

std::filesystem::path cmd_simulate(const config::PipelineConfig& cfg) {
    cfg.validate();
    signals::SyntheticCohortSpec spec;
    spec.n_subjects = cfg.n_subjects;
    spec.positive_fraction = cfg.positive_fraction;
    spec.effect_size = cfg.effect_size;
    spec.seed = cfg.seed;
    const auto cohort = signals::generate_synthetic_cohort(spec);
    const auto dir = cfg.out_dir / "cohort";
    signals::export_cohort(cohort, dir);
    return dir / "manifest.json";
}

RunResult cmd_run(const config::PipelineConfig& cfg) {
    cfg.validate();
    const auto manifest_path =
        cfg.manifest.empty() ? cfg.out_dir / "cohort" / "manifest.json"
                             : cfg.manifest;
    const auto entries = signals::read_manifest(manifest_path);
    if (entries.size() < 4)
        throw DataError("cmd_run: need at least 4 subjects");

    const graphdiff::BrainGraph graph = load_graph(cfg);
    model::ExtractorSpec espec;
    espec.d_model = cfg.d_model;
    const model::ExtractorBank bank(espec, graph, cfg.seed);
    const hamiltonian::EnergyModel em = make_energy_model();

    const int n = static_cast<int>(entries.size());
    std::vector<SubjectData> data(n);
    std::string first_error;
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers) \
    if (cfg.workers > 1)
    for (int i = 0; i < n; ++i) {
        try {
            data[i] = process_subject(entries[i], cfg, graph, bank, em);
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty())
                first_error = "subject " + entries[i].subject_id + ": " + e.what();
        }
    }
    if (!first_error.empty()) throw DataError(first_error);

    // Stratified split, deterministic in the seed.
    std::vector<int> pos_idx, neg_idx;
    for (int i = 0; i < n; ++i)
        (data[i].bio.label ? pos_idx : neg_idx).push_back(i);
    std::mt19937_64 split_rng(cfg.seed ^ 0x5417AB1EULL);
    std::shuffle(pos_idx.begin(), pos_idx.end(), split_rng);
    std::shuffle(neg_idx.begin(), neg_idx.end(), split_rng);
    std::vector<bool> in_train(n, false);
    for (const auto* cls : {&pos_idx, &neg_idx}) {
        const auto n_train = static_cast<std::size_t>(
            std::lround(cfg.train_fraction * double(cls->size())));
        for (std::size_t k = 0; k < std::min(n_train, cls->size()); ++k)
            in_train[(*cls)[k]] = true;
    }

    std::vector<std::vector<Eigen::VectorXd>> tr_feat;
    std::vector<std::vector<bool>> tr_mask;
    std::vector<int> tr_labels;
    std::vector<double> tr_resid;
    for (int i = 0; i < n; ++i) {
        data[i].bio.held_out = !in_train[i];
        if (in_train[i]) {
            tr_feat.push_back(data[i].embeddings);
            tr_mask.push_back(data[i].present);
            tr_labels.push_back(data[i].bio.label);
            tr_resid.push_back(data[i].bio.stroke_residual);
        }
    }

    model::FitConfig fit;
    fit.epochs = cfg.epochs;
    fit.lr = cfg.lr;
    fit.seed = cfg.seed;
    fit.loss = {cfg.lambda_att, cfg.lambda_stroke, cfg.entropy_sign};
    const model::TrainedFusion tf = model::train_head(
        tr_feat, tr_mask, tr_labels, tr_resid, cfg.heads, cfg.d_k, fit);

    std::vector<double> tr_scores, te_scores;
    std::vector<int> tr_y, te_y;
    Eigen::MatrixXd att_sum;
    for (int i = 0; i < n; ++i) {
        const double p = model::fusion_predict(data[i].embeddings,
                                               data[i].present, tf.proj, tf.head);
        data[i].bio.model_prob = p;
        auto [fused, att] = attention::cross_modal_fuse(
            data[i].embeddings, data[i].present, tf.proj);
        data[i].bio.attention_entropy = attention::attention_entropy(att);
        if (att_sum.size() == 0)
            att_sum = Eigen::MatrixXd::Zero(att.weights.rows(), att.weights.cols());
        att_sum += att.weights;
        if (in_train[i]) {
            tr_scores.push_back(p);
            tr_y.push_back(data[i].bio.label);
        } else {
            te_scores.push_back(p);
            te_y.push_back(data[i].bio.label);
        }
    }

    RunResult res;
    res.config_hash = cfg.hash_hex();
    res.seed = cfg.seed;
    res.n_train = static_cast<int>(tr_scores.size());
    res.n_test = static_cast<int>(te_scores.size());
    res.heldout = model::metrics(te_scores, te_y, cfg.threshold);
    res.train = model::metrics(tr_scores, tr_y, cfg.threshold);

    // Logistic baseline on scalar biomarker features.
    auto baseline_features = [&](int i) {
        Eigen::VectorXd f(6);
        const auto& b = data[i].bio;
        f << b.latent_energy_entropy, b.attention_entropy, b.geodesic_mean,
            b.curvature_mean,
            b.memory_index.at(Modality::EEG).value_or(0.5), b.stroke_residual;
        return f;
    };
    {
        Eigen::MatrixXd ftr(res.n_train, 6);
        std::vector<int> ytr;
        int r = 0;
        for (int i = 0; i < n; ++i)
            if (in_train[i]) {
                ftr.row(r++) = baseline_features(i).transpose();
                ytr.push_back(data[i].bio.label);
            }
        try {
            const auto lm = model::logistic_baseline_fit(ftr, ytr);
            std::vector<double> bscores;
            std::vector<int> by;
            for (int i = 0; i < n; ++i)
                if (!in_train[i]) {
                    bscores.push_back(
                        model::logistic_baseline_predict(baseline_features(i), lm));
                    by.push_back(data[i].bio.label);
                }
            res.baseline_heldout = model::metrics(bscores, by, cfg.threshold);
        } catch (const DataError&) {
            res.baseline_heldout.degenerate = true;
        }
    }

    // Composite risk index over cohort-z-scored biomarkers.
    Eigen::MatrixXd bm(n, 5);
    for (int i = 0; i < n; ++i) {
        const auto& b = data[i].bio;
        bm.row(i) << b.latent_energy_entropy, b.attention_entropy,
            b.geodesic_mean, b.memory_index.at(Modality::EEG).value_or(0.5),
            b.stroke_residual;
    }
    const model::CohortZscore cz = model::cohort_zscore(bm);
    const Eigen::VectorXd cri_w = Eigen::VectorXd::Constant(5, 0.5);
    for (int i = 0; i < n; ++i)
        data[i].bio.composite_risk = model::composite_risk_index(
            cz.z.row(i).transpose(), cz.dropped, data[i].bio.model_prob, cri_w);

    res.diffusion_centrality =
        graphdiff::diffusion_centrality(graph, cfg.beta, cfg.centrality_walk);
    for (auto& sd : data) res.subjects.push_back(std::move(sd.bio));

    // Reports.
    std::filesystem::create_directories(cfg.out_dir);
    json subj = json::array();
    for (const auto& b : res.subjects) {
        json mi = json::object();
        for (const auto& [m, v] : b.memory_index)
            mi[signals::modality_name(m)] = v ? json(*v) : json(nullptr);
        subj.push_back({{"subject_id", b.subject_id},
                        {"label", b.label},
                        {"held_out", b.held_out},
                        {"latent_energy_entropy", b.latent_energy_entropy},
                        {"attention_entropy", b.attention_entropy},
                        {"geodesic_mean", b.geodesic_mean},
                        {"geodesic_max", b.geodesic_max},
                        {"curvature_mean", b.curvature_mean},
                        {"memory_index", mi},
                        {"stroke_residual", b.stroke_residual},
                        {"model_prob", b.model_prob},
                        {"composite_risk", b.composite_risk}});
    }
    json centrality = json::array();
    for (Eigen::Index i = 0; i < res.diffusion_centrality.size(); ++i)
        centrality.push_back(res.diffusion_centrality[i]);
    write_json(cfg.out_dir / "biomarker_report.json",
               {{"config_hash", res.config_hash},
                {"seed", res.seed},
                {"subjects", subj},
                {"region_labels", graph.labels},
                {"diffusion_centrality", centrality}});
    write_json(cfg.out_dir / "metrics.json",
               {{"config_hash", res.config_hash},
                {"seed", res.seed},
                {"n_train", res.n_train},
                {"n_test", res.n_test},
                {"heldout", metrics_json(res.heldout)},
                {"train", metrics_json(res.train)},
                {"baseline_heldout", metrics_json(res.baseline_heldout)}});

    {
        std::ofstream f(cfg.out_dir / "attention_weights.csv");
        f << "query";
        for (const Modality m : kModalityOrder)
            f << "," << signals::modality_name(m);
        f << "\n";
        const Eigen::MatrixXd mean_att = att_sum / double(n);
        for (Eigen::Index i = 0; i < mean_att.rows(); ++i) {
            f << signals::modality_name(kModalityOrder[i]);
            for (Eigen::Index j = 0; j < mean_att.cols(); ++j) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.17g", mean_att(i, j));
                f << "," << buf;
            }
            f << "\n";
        }
    }
    return res;
}

DiffuseResult cmd_diffuse(const config::PipelineConfig& cfg) {
    cfg.validate();
    const graphdiff::BrainGraph g = load_graph(cfg);

    DiffuseResult res;
    res.labels = g.labels;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(g.n_regions());
    for (int i = 0; i < g.n_regions(); ++i)
        if (is_brainstem_label(g.labels[i])) x0[i] = 1.0;
    if (x0.maxCoeff() == 0.0) x0.setConstant(1.0);  // no brainstem labels

    graphdiff::DiffusionParams p{cfg.alpha, cfg.beta, cfg.gamma};
    res.trajectory =
        graphdiff::fractional_diffuse(g, p, {x0, 0.0}, cfg.horizon, cfg.step);
    res.centrality =
        graphdiff::diffusion_centrality(g, cfg.beta, cfg.centrality_walk);

    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ofstream f(cfg.out_dir / "risk_trajectory.csv");
        if (!f) throw DataError("cannot write risk_trajectory.csv");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", cfg.alpha);
        f << "# alpha," << buf << "\n";
        f << "t";
        for (const auto& l : g.labels) f << "," << l;
        f << "\n";
        // Thin the trajectory to at most ~200 snapshot rows, keeping the
        // final state.
        const std::size_t n_states = res.trajectory.size();
        const std::size_t stride = std::max<std::size_t>(1, n_states / 200);
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < n_states; i += stride) rows.push_back(i);
        if (rows.back() != n_states - 1) rows.push_back(n_states - 1);
        for (const std::size_t i : rows) {
            const auto& s = res.trajectory[i];
            std::snprintf(buf, sizeof(buf), "%.17g", s.t);
            f << buf;
            for (Eigen::Index r = 0; r < s.x.size(); ++r) {
                std::snprintf(buf, sizeof(buf), "%.17g", s.x[r]);
                f << "," << buf;
            }
            f << "\n";
        }
    }
    {
        json c = json::object();
        for (int i = 0; i < g.n_regions(); ++i)
            c[g.labels[i]] = res.centrality[i];
        write_json(cfg.out_dir / "centrality.json",
                   {{"config_hash", cfg.hash_hex()}, {"centrality", c}});
    }
    return res;
}

ReportResult cmd_report(const std::vector<std::filesystem::path>& metric_files,
                        const std::filesystem::path& out_dir, bool force) {
    if (metric_files.empty()) throw DataError("cmd_report: no input files");

    json runs = json::array();
    std::string hash;
    ReportResult res;
    double sum_auc = 0.0, sum_acc = 0.0, sum_f1 = 0.0;
    for (const auto& p : metric_files) {
        std::ifstream f(p);
        if (!f) throw DataError("cmd_report: cannot read " + p.string());
        json j;
        try {
            f >> j;
        } catch (const json::exception& e) {
            throw DataError(p.string() + ": " + e.what());
        }
        const std::string h = j.at("config_hash");
        if (hash.empty()) hash = h;
        else if (h != hash && !force)
            throw DataError("cmd_report: config hash mismatch (" + hash +
                            " vs " + h + "); pass --force to merge anyway");
        const model::MetricsReport m = metrics_from_json(j.at("heldout"));
        sum_auc += m.auc;
        sum_acc += m.acc;
        sum_f1 += m.f1;
        j["source"] = p.string();
        runs.push_back(j);
        ++res.n_runs;
    }
    res.mean_auc = sum_auc / res.n_runs;
    res.mean_acc = sum_acc / res.n_runs;
    res.mean_f1 = sum_f1 / res.n_runs;

    std::filesystem::create_directories(out_dir);
    write_json(out_dir / "summary.json",
               {{"n_runs", res.n_runs},
                {"mean_auc", res.mean_auc},
                {"mean_acc", res.mean_acc},
                {"mean_f1", res.mean_f1},
                {"runs", runs}});
    return res;
}

}  // namespace gsm::pipeline
