#include "gsm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gsm/errors.hpp"

namespace gsm::model {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamp01(double p) {
    return std::min(1.0 - 1e-12, std::max(1e-12, p));
}

double bce(double yhat, int y) {
    const double p = clamp01(yhat);
    return y ? -std::log(p) : -std::log(1.0 - p);
}

}  // namespace

Eigen::MatrixXd apply_activation(Eigen::MatrixXd m, Activation act) {
    switch (act) {
        case Activation::Relu: return m.cwiseMax(0.0);
        case Activation::Tanh: return m.array().tanh().matrix();
        case Activation::Identity: return m;
    }
    throw ConfigError("unknown activation");
}

Eigen::MatrixXd conv1d_forward(const Eigen::MatrixXd& x,
                               const std::vector<Eigen::MatrixXd>& filters,
                               const Eigen::VectorXd& bias, int stride,
                               Activation act) {
    if (filters.empty()) throw ConfigError("conv1d_forward: no filters");
    if (stride < 1) throw ConfigError("conv1d_forward: stride must be >= 1");
    const auto c = x.rows();
    const auto t = x.cols();
    const auto k = filters[0].cols();
    if (k > t) throw DataError("conv1d_forward: kernel longer than input");
    if (bias.size() != static_cast<Eigen::Index>(filters.size()))
        throw DataError("conv1d_forward: bias length != filter count");
    for (const auto& f : filters)
        if (f.rows() != c || f.cols() != k)
            throw DataError("conv1d_forward: filter shape mismatch");

    const auto t_out = (t - k) / stride + 1;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(filters.size()), t_out);
    for (Eigen::Index f = 0; f < out.rows(); ++f)
        for (Eigen::Index i = 0; i < t_out; ++i)
            out(f, i) = (x.middleCols(i * stride, k).array() *
                         filters[f].array()).sum() + bias[f];
    return apply_activation(std::move(out), act);
}

Eigen::MatrixXd conv1d_forward(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& kernel, int stride,
                               Activation act) {
    if (kernel.size() > x.cols())
        throw DataError("conv1d_forward: kernel longer than input");
    const auto t_out = (x.cols() - kernel.size()) / stride + 1;
    Eigen::MatrixXd out(x.rows(), t_out);
    for (Eigen::Index c = 0; c < x.rows(); ++c)
        for (Eigen::Index i = 0; i < t_out; ++i)
            out(c, i) = x.row(c).segment(i * stride, kernel.size()).dot(kernel);
    return apply_activation(std::move(out), act);
}

Eigen::VectorXd lstm_final_state(const Eigen::MatrixXd& x,
                                 const LstmWeights& w) {
    if (x.cols() == 0) throw DataError("lstm_final_state: empty sequence");
    const int hdim = w.hidden();
    if (w.w_x.rows() != 4 * hdim || w.w_x.cols() != x.rows() ||
        w.bias.size() != 4 * hdim)
        throw DataError("lstm_final_state: weight shape mismatch");

    Eigen::VectorXd h = Eigen::VectorXd::Zero(hdim);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(hdim);
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
        const Eigen::VectorXd gates = w.w_x * x.col(t) + w.w_h * h + w.bias;
        for (int j = 0; j < hdim; ++j) {
            const double gi = sigmoid(gates[j]);
            const double gf = sigmoid(gates[hdim + j]);
            const double gg = std::tanh(gates[2 * hdim + j]);
            const double go = sigmoid(gates[3 * hdim + j]);
            c[j] = gf * c[j] + gi * gg;
            h[j] = go * std::tanh(c[j]);
        }
    }
    return h;
}

Eigen::VectorXd bilstm_forward(const Eigen::MatrixXd& x,
                               const LstmWeights& fwd, const LstmWeights& bwd) {
    Eigen::VectorXd hf = lstm_final_state(x, fwd);
    Eigen::VectorXd hb = lstm_final_state(x.rowwise().reverse(), bwd);
    Eigen::VectorXd out(hf.size() + hb.size());
    out << hf, hb;
    return out;
}

Eigen::MatrixXd maxpool_forward(const Eigen::MatrixXd& x, int window,
                                int stride) {
    if (window < 1 || window > x.cols())
        throw DataError("maxpool_forward: window outside [1, T]");
    if (stride < 1) throw ConfigError("maxpool_forward: stride must be >= 1");
    const auto t_out = (x.cols() - window) / stride + 1;
    Eigen::MatrixXd out(x.rows(), t_out);
    for (Eigen::Index i = 0; i < t_out; ++i)
        out.col(i) = x.middleCols(i * stride, window).rowwise().maxCoeff();
    return out;
}

double predict(const Eigen::VectorXd& fused, const PredictionHead& head) {
    if (fused.size() != head.w_out.size())
        throw DataError("predict: fused/head dimension mismatch");
    return clamp01(sigmoid(head.w_out.dot(fused) + head.b_out));
}

double composite_loss(double yhat, int y, const attention::AttentionOutput& att,
                      double diffusion_res, const LossWeights& w) {
    if (w.lambda_att < 0.0 || w.lambda_stroke < 0.0)
        throw ConfigError("composite_loss: lambdas must be nonnegative");
    double l = bce(yhat, y);
    if (w.lambda_att > 0.0)
        l += w.lambda_att * w.entropy_sign * attention::attention_entropy(att);
    l += w.lambda_stroke * diffusion_res * diffusion_res;
    return l;
}

double diffusion_residual(const std::vector<graphdiff::RiskState>& traj,
                          const graphdiff::BrainGraph& g, double alpha,
                          double beta, double gamma) {
    if (traj.size() < 3) throw DataError("diffusion_residual: trajectory too short");
    const double h = traj[1].t - traj[0].t;
    const int n = g.n_regions();

    double acc = 0.0;
    long count = 0;
    for (int r = 0; r < n; ++r) {
        std::vector<double> series(traj.size());
        for (std::size_t i = 0; i < traj.size(); ++i) series[i] = traj[i].x[r];
        const std::vector<double> dcap = fractional::caputo_derivative(
            series, fractional::FractionalOrder(alpha), h);
        for (std::size_t i = 1; i < traj.size(); ++i) {
            const double drift =
                beta * g.adjacency.row(r).dot(traj[i].x) - gamma * traj[i].x[r];
            const double d = dcap[i] - drift;
            acc += d * d;
            ++count;
        }
    }
    return std::sqrt(acc / double(count));
}

// ---- extractor bank ------------------------------------------------------

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                              Eigen::Index cols, double scale) {
    std::normal_distribution<double> gauss(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

Eigen::VectorXd rowwise_rms(const Eigen::MatrixXd& m) {
    return m.array().square().rowwise().mean().sqrt().matrix();
}

}  // namespace

ExtractorBank::ExtractorBank(const ExtractorSpec& spec,
                             const graphdiff::BrainGraph& graph,
                             std::uint64_t seed)
    : spec_(spec), graph_(graph) {
    using signals::Modality;
    std::mt19937_64 rng(seed ^ 0xE5A3F00DULL);

    auto make_filters = [&](int c_in, int k, int count) {
        std::vector<Eigen::MatrixXd> fs;
        for (int f = 0; f < count; ++f)
            fs.push_back(random_matrix(rng, c_in, k,
                                       1.0 / std::sqrt(double(c_in * k))));
        return fs;
    };

    // EEG uses one filter group per kernel size; the channel count is
    // fixed by the cohort layout at embed time, so filters are built lazily
    // would complicate determinism -- instead they are built for the
    // default layouts and inputs are adapted by channel truncation/padding.
    const auto layouts = signals::default_layouts();
    for (const int k : spec_.eeg_kernels) {
        auto fs = make_filters(layouts.at(Modality::EEG).channels, k,
                               spec_.conv_filters);
        conv_filters_[Modality::EEG].insert(conv_filters_[Modality::EEG].end(),
                                            fs.begin(), fs.end());
    }
    for (Modality m : {Modality::ECG, Modality::Resp, Modality::SpO2,
                       Modality::EMG})
        conv_filters_[m] =
            make_filters(layouts.at(m).channels, 7, spec_.conv_filters);

    const int lstm_in = spec_.conv_filters * int(spec_.eeg_kernels.size());
    const double ls = 1.0 / std::sqrt(double(lstm_in + spec_.lstm_hidden));
    for (LstmWeights* w : {&lstm_fwd_, &lstm_bwd_}) {
        w->w_x = random_matrix(rng, 4 * spec_.lstm_hidden, lstm_in, ls);
        w->w_h = random_matrix(rng, 4 * spec_.lstm_hidden, spec_.lstm_hidden, ls);
        w->bias = Eigen::VectorXd::Zero(4 * spec_.lstm_hidden);
    }

    attn_query_ = random_matrix(rng, spec_.conv_filters, 1, 1.0).col(0);

    gcn_weights_.push_back(random_matrix(rng, 3, spec_.gcn_width, 0.5));
    gcn_weights_.push_back(
        random_matrix(rng, spec_.gcn_width, spec_.gcn_width, 0.5));

    // Projection widths must match the feature layouts built in embed_*.
    const int eeg_feat = lstm_in + 2 * spec_.lstm_hidden;
    const int ca_feat = 2 * spec_.conv_filters;
    const int emg_feat = 2 * spec_.conv_filters;
    const int bold_feat = spec_.gcn_width + 3;
    auto add_proj = [&](Modality m, int feat) {
        proj_[m] = random_matrix(rng, spec_.d_model, feat,
                                 1.0 / std::sqrt(double(feat)));
    };
    add_proj(Modality::EEG, eeg_feat);
    add_proj(Modality::ECG, ca_feat);
    add_proj(Modality::Resp, ca_feat);
    add_proj(Modality::SpO2, ca_feat);
    add_proj(Modality::EMG, emg_feat);
    add_proj(Modality::FmriBold, bold_feat);
}

Eigen::VectorXd ExtractorBank::project(const Eigen::VectorXd& feat,
                                       signals::Modality m) const {
    const Eigen::MatrixXd& p = proj_.at(m);
    if (feat.size() != p.cols())
        throw DataError("ExtractorBank: feature width mismatch for " +
                        signals::modality_name(m));
    return p * feat;
}

namespace {

// Adapts the channel count to what the fixed filters expect.
Eigen::MatrixXd fit_channels(const Eigen::MatrixXd& x, Eigen::Index c) {
    if (x.rows() == c) return x;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(c, x.cols());
    const auto copy = std::min(c, x.rows());
    out.topRows(copy) = x.topRows(copy);
    return out;
}

}  // namespace

Eigen::VectorXd ExtractorBank::embed_eeg(const Eigen::MatrixXd& x) const {
    const auto& filters = conv_filters_.at(signals::Modality::EEG);
    const Eigen::MatrixXd xin = fit_channels(x, filters[0].rows());
    const int f_per_group = spec_.conv_filters;
    const int groups = int(spec_.eeg_kernels.size());

    // Kernel sizes differ per group, so group maps are convolved separately
    // and cropped to a common length.
    std::vector<Eigen::MatrixXd> maps;
    Eigen::Index min_t = xin.cols();
    for (int gidx = 0; gidx < groups; ++gidx) {
        std::vector<Eigen::MatrixXd> group(
            filters.begin() + gidx * f_per_group,
            filters.begin() + (gidx + 1) * f_per_group);
        Eigen::MatrixXd m = conv1d_forward(
            xin, group, Eigen::VectorXd::Zero(f_per_group), spec_.conv_stride,
            Activation::Relu);
        min_t = std::min(min_t, m.cols());
        maps.push_back(std::move(m));
    }
    Eigen::MatrixXd fmap(groups * f_per_group, min_t);
    for (int gidx = 0; gidx < groups; ++gidx)
        fmap.middleRows(gidx * f_per_group, f_per_group) =
            maps[gidx].leftCols(min_t);

    Eigen::VectorXd rms = rowwise_rms(fmap);
    Eigen::VectorXd rec = bilstm_forward(fmap, lstm_fwd_, lstm_bwd_);
    Eigen::VectorXd feat(rms.size() + rec.size());
    feat << rms, rec;
    return project(feat, signals::Modality::EEG);
}

Eigen::VectorXd ExtractorBank::embed_conv_attention(const Eigen::MatrixXd& x,
                                                    signals::Modality m) const {
    const auto& filters = conv_filters_.at(m);
    const Eigen::MatrixXd fmap = conv1d_forward(
        fit_channels(x, filters[0].rows()), filters,
        Eigen::VectorXd::Zero(Eigen::Index(filters.size())), spec_.conv_stride,
        Activation::Relu);

    // Attention pooling over time with a fixed query.
    Eigen::VectorXd scores = fmap.transpose() * attn_query_;
    const double mx = scores.maxCoeff();
    Eigen::ArrayXd w = (scores.array() - mx).exp();
    w /= w.sum();
    Eigen::VectorXd pooled = fmap * w.matrix();

    Eigen::VectorXd feat(2 * pooled.size());
    feat << pooled, rowwise_rms(fmap);
    return project(feat, m);
}

Eigen::VectorXd ExtractorBank::embed_emg(const Eigen::MatrixXd& x) const {
    const auto& filters = conv_filters_.at(signals::Modality::EMG);
    Eigen::MatrixXd fmap = conv1d_forward(
        fit_channels(x, filters[0].rows()), filters,
        Eigen::VectorXd::Zero(Eigen::Index(filters.size())), 1,
        Activation::Relu);
    fmap = maxpool_forward(fmap, spec_.pool_window, spec_.pool_window);
    Eigen::VectorXd feat(2 * fmap.rows());
    feat << fmap.rowwise().mean(), rowwise_rms(fmap);
    return project(feat, signals::Modality::EMG);
}

Eigen::VectorXd ExtractorBank::embed_bold(const Eigen::MatrixXd& x) const {
    const int n = graph_.n_regions();
    const Eigen::MatrixXd xin = fit_channels(x, n);
    const auto t = xin.cols();
    if (t < 3) throw DataError("ExtractorBank: BOLD series too short");

    const Eigen::VectorXd global = xin.colwise().mean();
    Eigen::MatrixXd h0(n, 3);
    for (int r = 0; r < n; ++r) {
        const Eigen::VectorXd row = xin.row(r);
        const double mean = row.mean();
        const Eigen::VectorXd cen = row.array() - mean;
        const double var = cen.squaredNorm() / double(t);
        const double sd = std::sqrt(std::max(var, 1e-12));
        // Lag-1 autocorrelation and coupling to the global signal survive
        // per-channel normalization upstream.
        double lag1 = 0.0;
        for (Eigen::Index i = 0; i + 1 < t; ++i) lag1 += cen[i] * cen[i + 1];
        lag1 /= double(t - 1) * std::max(var, 1e-12);
        const Eigen::VectorXd gcen = global.array() - global.mean();
        const double gsd = std::sqrt(gcen.squaredNorm() / double(t) + 1e-12);
        const double coup = cen.dot(gcen) / (double(t) * sd * gsd);
        h0(r, 0) = sd;
        h0(r, 1) = lag1;
        h0(r, 2) = coup;
    }

    Eigen::MatrixXd h = h0;
    for (const auto& w : gcn_weights_)
        h = graphdiff::gcn_layer(h, graph_, w, graphdiff::Activation::Tanh);

    // Brainstem rows carry the planted risk signal; summarize them apart.
    Eigen::Index bs_from = std::max(0, n - 5);
    Eigen::VectorXd feat(h.cols() + 3);
    feat.head(h.cols()) = h.colwise().mean().transpose();
    feat[h.cols() + 0] = h0.col(1).tail(n - bs_from).mean();
    feat[h.cols() + 1] = h0.col(2).tail(n - bs_from).mean();
    feat[h.cols() + 2] = h0.col(1).head(bs_from).mean();
    return project(feat, signals::Modality::FmriBold);
}

Eigen::VectorXd ExtractorBank::embed(const signals::TimeSeriesWindow& w) const {
    using signals::Modality;
    switch (w.modality) {
        case Modality::EEG: return embed_eeg(w.values);
        case Modality::ECG:
        case Modality::Resp:
        case Modality::SpO2:
            return embed_conv_attention(w.values, w.modality);
        case Modality::EMG: return embed_emg(w.values);
        case Modality::FmriBold: return embed_bold(w.values);
    }
    throw ConfigError("ExtractorBank: unknown modality");
}

// ---- trainable fusion ----------------------------------------------------

namespace {

struct FusionForward {
    Eigen::MatrixXd tokens;                 // M x D
    std::vector<Eigen::MatrixXd> p;         // per head, M x M
    std::vector<Eigen::MatrixXd> q, k, v;   // per head
    Eigen::MatrixXd head_out;               // M x heads*dk
    Eigen::MatrixXd mean_weights;           // M x M
    Eigen::VectorXd z;
    double logit = 0.0;
    double yhat = 0.5;
};

FusionForward fusion_forward(const std::vector<Eigen::VectorXd>& embeddings,
                             const std::vector<bool>& present,
                             const attention::ProjectionSet& proj,
                             const PredictionHead& head) {
    proj.validate();
    const auto m = static_cast<Eigen::Index>(embeddings.size());
    if (m == 0 || present.size() != embeddings.size())
        throw DataError("fusion_forward: embeddings/mask mismatch");
    const auto d = embeddings[0].size();

    FusionForward f;
    f.tokens.resize(m, d);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (present[i])
            f.tokens.row(i) = embeddings[i].transpose();
        else
            f.tokens.row(i).setZero();
    }

    const int heads = proj.heads();
    const int dk = proj.d_k();
    const double scale = 1.0 / std::sqrt(double(dk));
    f.head_out.resize(m, Eigen::Index(heads) * dk);
    f.mean_weights = Eigen::MatrixXd::Zero(m, m);
    for (int hidx = 0; hidx < heads; ++hidx) {
        f.q.push_back(f.tokens * proj.w_q[hidx]);
        f.k.push_back(f.tokens * proj.w_k[hidx]);
        f.v.push_back(f.tokens * proj.w_v[hidx]);
        Eigen::MatrixXd logits = scale * f.q.back() * f.k.back().transpose();
        for (Eigen::Index j = 0; j < m; ++j)
            if (!present[j])
                logits.col(j).setConstant(-std::numeric_limits<double>::infinity());
        Eigen::MatrixXd p(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double mx = logits.row(i).maxCoeff();
            Eigen::ArrayXd e = (logits.row(i).array() - mx).exp();
            p.row(i) = (e / e.sum()).matrix();
        }
        f.head_out.middleCols(Eigen::Index(hidx) * dk, dk) = p * f.v.back();
        f.mean_weights += p;
        f.p.push_back(std::move(p));
    }
    f.mean_weights /= double(heads);

    f.z.resize(m * d + f.head_out.size());
    for (Eigen::Index i = 0; i < m; ++i)
        f.z.segment(i * d, d) = f.tokens.row(i).transpose();
    for (Eigen::Index i = 0; i < m; ++i)
        f.z.segment(m * d + i * f.head_out.cols(), f.head_out.cols()) =
            f.head_out.row(i).transpose();

    f.logit = head.w_out.dot(f.z) + head.b_out;
    f.yhat = clamp01(sigmoid(f.logit));
    return f;
}

}  // namespace

double fusion_predict(const std::vector<Eigen::VectorXd>& embeddings,
                      const std::vector<bool>& present,
                      const attention::ProjectionSet& proj,
                      const PredictionHead& head) {
    return fusion_forward(embeddings, present, proj, head).yhat;
}

FusionGradients fusion_loss_gradients(
    const std::vector<Eigen::VectorXd>& embeddings,
    const std::vector<bool>& present, const attention::ProjectionSet& proj,
    const PredictionHead& head, int label, double stroke_residual,
    const LossWeights& lw) {
    const FusionForward f = fusion_forward(embeddings, present, proj, head);
    const auto m = f.tokens.rows();
    const auto d = f.tokens.cols();
    const int heads = proj.heads();
    const int dk = proj.d_k();
    const double scale = 1.0 / std::sqrt(double(dk));

    FusionGradients g;
    g.loss = bce(f.yhat, label) +
             lw.lambda_att * lw.entropy_sign *
                 attention::attention_entropy({f.head_out, f.mean_weights}) +
             lw.lambda_stroke * stroke_residual * stroke_residual;

    const double dlogit = f.yhat - double(label);
    g.d_w_out = dlogit * f.z;
    g.d_b_out = dlogit;

    // Gradient w.r.t. the attention part of z.
    Eigen::MatrixXd d_head_out(m, Eigen::Index(heads) * dk);
    for (Eigen::Index i = 0; i < m; ++i)
        d_head_out.row(i) =
            dlogit *
            head.w_out.segment(m * d + i * d_head_out.cols(), d_head_out.cols())
                .transpose();

    // Entropy term: mean over rows of -sum p log p on head-averaged weights.
    const double ent_coef =
        lw.lambda_att * lw.entropy_sign / (double(m) * double(heads));

    for (int hidx = 0; hidx < heads; ++hidx) {
        const Eigen::MatrixXd& p = f.p[hidx];
        const Eigen::MatrixXd d_o =
            d_head_out.middleCols(Eigen::Index(hidx) * dk, dk);
        Eigen::MatrixXd d_p = d_o * f.v[hidx].transpose();
        if (lw.lambda_att != 0.0) {
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j < m; ++j)
                    if (f.mean_weights(i, j) > 0.0)
                        d_p(i, j) +=
                            ent_coef * (-std::log(f.mean_weights(i, j)) - 1.0);
        }
        const Eigen::MatrixXd d_v = p.transpose() * d_o;

        // Softmax backward per row; masked columns carry p = 0.
        Eigen::MatrixXd d_s(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            double dot = 0.0;
            for (Eigen::Index j = 0; j < m; ++j)
                if (p(i, j) > 0.0) dot += p(i, j) * d_p(i, j);
            for (Eigen::Index j = 0; j < m; ++j)
                d_s(i, j) = p(i, j) > 0.0 ? p(i, j) * (d_p(i, j) - dot) : 0.0;
        }

        const Eigen::MatrixXd d_q = scale * d_s * f.k[hidx];
        const Eigen::MatrixXd d_k = scale * d_s.transpose() * f.q[hidx];
        g.d_wq.push_back(f.tokens.transpose() * d_q);
        g.d_wk.push_back(f.tokens.transpose() * d_k);
        g.d_wv.push_back(f.tokens.transpose() * d_v);
    }
    return g;
}

TrainedFusion train_head(const std::vector<std::vector<Eigen::VectorXd>>& features,
                         const std::vector<std::vector<bool>>& masks,
                         const std::vector<int>& labels,
                         const std::vector<double>& stroke_residuals,
                         int heads, int d_k, const FitConfig& cfg) {
    const std::size_t n = features.size();
    if (n == 0 || masks.size() != n || labels.size() != n ||
        stroke_residuals.size() != n)
        throw DataError("train_head: inconsistent input sizes");
    int pos = 0;
    for (int y : labels) pos += y;
    if (pos < 2 || int(n) - pos < 2)
        throw DataError("train_head: need at least 2 subjects per class");

    const auto d_model = features[0][0].size();
    std::mt19937_64 rng(cfg.seed ^ 0xF0510ABCULL);
    TrainedFusion tf;
    const double ps = 1.0 / std::sqrt(double(d_model));
    for (int h = 0; h < heads; ++h) {
        tf.proj.w_q.push_back(random_matrix(rng, d_model, d_k, ps));
        tf.proj.w_k.push_back(random_matrix(rng, d_model, d_k, ps));
        tf.proj.w_v.push_back(random_matrix(rng, d_model, d_k, ps));
    }
    const auto z_dim =
        Eigen::Index(features[0].size()) * (d_model + Eigen::Index(heads) * d_k);
    tf.head.w_out = Eigen::VectorXd::Zero(z_dim);
    tf.head.b_out = 0.0;

    auto batch_loss = [&](const attention::ProjectionSet& proj,
                          const PredictionHead& head) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const FusionForward f =
                fusion_forward(features[i], masks[i], proj, head);
            acc += bce(f.yhat, labels[i]) +
                   cfg.loss.lambda_att * cfg.loss.entropy_sign *
                       attention::attention_entropy(
                           {f.head_out, f.mean_weights}) +
                   cfg.loss.lambda_stroke * stroke_residuals[i] *
                       stroke_residuals[i];
        }
        return acc / double(n);
    };

    double lr = cfg.lr;
    double loss_cur = batch_loss(tf.proj, tf.head);
    tf.loss_history.push_back(loss_cur);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        FusionGradients sum;
        for (std::size_t i = 0; i < n; ++i) {
            FusionGradients g =
                fusion_loss_gradients(features[i], masks[i], tf.proj, tf.head,
                                      labels[i], stroke_residuals[i], cfg.loss);
            if (i == 0) {
                sum = std::move(g);
            } else {
                for (int h = 0; h < heads; ++h) {
                    sum.d_wq[h] += g.d_wq[h];
                    sum.d_wk[h] += g.d_wk[h];
                    sum.d_wv[h] += g.d_wv[h];
                }
                sum.d_w_out += g.d_w_out;
                sum.d_b_out += g.d_b_out;
            }
        }
        const double inv_n = 1.0 / double(n);

        attention::ProjectionSet cand_proj = tf.proj;
        PredictionHead cand_head = tf.head;
        double cand_loss = loss_cur;
        while (true) {
            for (int h = 0; h < heads; ++h) {
                cand_proj.w_q[h] = tf.proj.w_q[h] - lr * inv_n * sum.d_wq[h];
                cand_proj.w_k[h] = tf.proj.w_k[h] - lr * inv_n * sum.d_wk[h];
                cand_proj.w_v[h] = tf.proj.w_v[h] - lr * inv_n * sum.d_wv[h];
            }
            cand_head.w_out = tf.head.w_out - lr * inv_n * sum.d_w_out;
            cand_head.b_out = tf.head.b_out - lr * inv_n * sum.d_b_out;
            cand_loss = batch_loss(cand_proj, cand_head);
            if (cand_loss <= loss_cur + 1e-12 || lr < 1e-12) break;
            lr *= 0.5;
        }
        if (cand_loss <= loss_cur + 1e-12) {
            tf.proj = std::move(cand_proj);
            tf.head = std::move(cand_head);
            loss_cur = cand_loss;
        }
        tf.loss_history.push_back(loss_cur);
    }
    tf.final_lr = lr;
    return tf;
}

// ---- metrics -------------------------------------------------------------

double rank_auc(const std::vector<double>& scores,
                const std::vector<int>& labels) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = 0.5 * double(i + j) + 1.0;  // 1-based average rank
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }

    double rank_sum = 0.0;
    long n1 = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (labels[k]) {
            rank_sum += rank[k];
            ++n1;
        }
    const long n0 = long(n) - n1;
    if (n1 == 0 || n0 == 0) throw DataError("rank_auc: single-class labels");
    return (rank_sum - 0.5 * double(n1) * double(n1 + 1)) /
           (double(n1) * double(n0));
}

MetricsReport metrics(const std::vector<double>& scores,
                      const std::vector<int>& labels, double threshold) {
    MetricsReport r;
    if (scores.empty() || scores.size() != labels.size()) {
        r.degenerate = true;
        return r;
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (labels[i] && pred) ++r.tp;
        else if (!labels[i] && pred) ++r.fp;
        else if (labels[i] && !pred) ++r.fn;
        else ++r.tn;
    }
    const long total = r.tp + r.fp + r.fn + r.tn;
    r.acc = double(r.tp + r.tn) / double(total);
    if (r.tp + r.fp > 0) r.precision = double(r.tp) / double(r.tp + r.fp);
    else r.degenerate = true;
    if (r.tp + r.fn > 0) r.recall = double(r.tp) / double(r.tp + r.fn);
    else r.degenerate = true;
    if (r.precision + r.recall > 0.0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    else r.degenerate = true;
    try {
        r.auc = rank_auc(scores, labels);
    } catch (const DataError&) {
        r.auc = 0.0;
        r.degenerate = true;
    }
    return r;
}

LogisticModel logistic_baseline_fit(const Eigen::MatrixXd& features,
                                    const std::vector<int>& labels,
                                    int epochs, double lr) {
    const auto n = features.rows();
    if (n == 0 || std::size_t(n) != labels.size())
        throw DataError("logistic_baseline_fit: feature/label mismatch");
    if (!features.allFinite())
        throw DataError("logistic_baseline_fit: non-finite features");
    int pos = 0;
    for (int y : labels) pos += y;
    if (pos == 0 || pos == int(n))
        throw DataError("logistic_baseline_fit: single-class data");

    LogisticModel m;
    m.w = Eigen::VectorXd::Zero(features.cols());
    for (int e = 0; e < epochs; ++e) {
        Eigen::VectorXd gw = Eigen::VectorXd::Zero(features.cols());
        double gb = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = sigmoid(features.row(i).dot(m.w) + m.b);
            const double d = p - double(labels[i]);
            gw += d * features.row(i).transpose();
            gb += d;
        }
        m.w -= lr / double(n) * gw;
        m.b -= lr / double(n) * gb;
    }
    return m;
}

double logistic_baseline_predict(const Eigen::VectorXd& f,
                                 const LogisticModel& m) {
    if (f.size() != m.w.size())
        throw DataError("logistic_baseline_predict: dimension mismatch");
    return sigmoid(m.w.dot(f) + m.b);
}

CohortZscore cohort_zscore(const Eigen::MatrixXd& biomarkers) {
    CohortZscore out;
    out.z = Eigen::MatrixXd::Zero(biomarkers.rows(), biomarkers.cols());
    out.dropped.assign(biomarkers.cols(), false);
    for (Eigen::Index c = 0; c < biomarkers.cols(); ++c) {
        const double mean = biomarkers.col(c).mean();
        const double sd = std::sqrt(
            (biomarkers.col(c).array() - mean).square().mean());
        if (sd <= 0.0) {
            out.dropped[c] = true;
        } else {
            out.z.col(c) = (biomarkers.col(c).array() - mean) / sd;
        }
    }
    return out;
}

double composite_risk_index(const Eigen::VectorXd& z_row,
                            const std::vector<bool>& dropped,
                            double model_prob, const Eigen::VectorXd& weights) {
    if (z_row.size() != weights.size() ||
        dropped.size() != std::size_t(weights.size()))
        throw DataError("composite_risk_index: dimension mismatch");
    if (weights.minCoeff() < 0.0)
        throw ConfigError("composite_risk_index: weights must be nonnegative");
    const double p = clamp01(model_prob);
    double logit = std::log(p / (1.0 - p));
    for (Eigen::Index i = 0; i < z_row.size(); ++i)
        if (!dropped[i]) logit += weights[i] * z_row[i];
    return sigmoid(logit);
}

}  // namespace gsm::model
