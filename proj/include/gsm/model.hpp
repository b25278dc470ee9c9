#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "gsm/attention.hpp"
#include "gsm/graphdiff.hpp"
#include "gsm/signals.hpp"

namespace gsm::model {

enum class Activation { Relu, Tanh, Identity };

Eigen::MatrixXd apply_activation(Eigen::MatrixXd m, Activation act);

// Valid-mode cross-correlation. Each filter is C_in x k and yields one
// output channel; output length = floor((T - k) / stride) + 1.
Eigen::MatrixXd conv1d_forward(const Eigen::MatrixXd& x,
                               const std::vector<Eigen::MatrixXd>& filters,
                               const Eigen::VectorXd& bias, int stride,
                               Activation act);

// Depthwise convenience: one shared 1-D kernel applied per channel.
Eigen::MatrixXd conv1d_forward(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& kernel, int stride,
                               Activation act = Activation::Identity);

// Gate order i, f, g, o stacked along rows (4H x D and 4H x H).
struct LstmWeights {
    Eigen::MatrixXd w_x;  // 4H x D
    Eigen::MatrixXd w_h;  // 4H x H
    Eigen::VectorXd bias; // 4H
    int hidden() const { return static_cast<int>(w_h.cols()); }
};

// Final hidden state of a single direction over time-major input (D x T).
Eigen::VectorXd lstm_final_state(const Eigen::MatrixXd& x,
                                 const LstmWeights& w);

// Concat of forward and reverse final hidden states (2H).
Eigen::VectorXd bilstm_forward(const Eigen::MatrixXd& x,
                               const LstmWeights& fwd, const LstmWeights& bwd);

Eigen::MatrixXd maxpool_forward(const Eigen::MatrixXd& x, int window,
                                int stride);

struct PredictionHead {
    Eigen::VectorXd w_out;
    double b_out = 0.0;
};

double predict(const Eigen::VectorXd& fused, const PredictionHead& head);

struct LossWeights {
    double lambda_att = 0.0;
    double lambda_stroke = 0.0;
    // +1 penalizes attention entropy (sharpens attention), -1 rewards it.
    double entropy_sign = 1.0;
};

double composite_loss(double yhat, int y, const attention::AttentionOutput& att,
                      double diffusion_residual, const LossWeights& w);

// Mean squared mismatch between the Caputo derivative of a discrete
// diffusion trajectory and the linear diffusion drift beta*A*X - gamma*X.
double diffusion_residual(const std::vector<graphdiff::RiskState>& traj,
                          const graphdiff::BrainGraph& g, double alpha,
                          double beta, double gamma);

// ---- fixed random-feature extractors -------------------------------------

struct ExtractorSpec {
    int d_model = 16;
    std::vector<int> eeg_kernels = {3, 5, 7};
    int conv_filters = 4;
    int conv_stride = 2;
    int lstm_hidden = 8;
    int pool_window = 8;
    int gcn_width = 8;
};

// Modality-specific feature extractors with seeded random weights.
// Weights are fixed at construction and shared across subjects; only the
// fusion parameters downstream are trained.
class ExtractorBank {
public:
    ExtractorBank(const ExtractorSpec& spec, const graphdiff::BrainGraph& graph,
                  std::uint64_t seed);

    Eigen::VectorXd embed(const signals::TimeSeriesWindow& w) const;

    const ExtractorSpec& spec() const { return spec_; }

private:
    Eigen::VectorXd embed_eeg(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd embed_conv_attention(const Eigen::MatrixXd& x,
                                         signals::Modality m) const;
    Eigen::VectorXd embed_emg(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd embed_bold(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd project(const Eigen::VectorXd& feat,
                            signals::Modality m) const;

    ExtractorSpec spec_;
    graphdiff::BrainGraph graph_;
    std::map<signals::Modality, std::vector<Eigen::MatrixXd>> conv_filters_;
    LstmWeights lstm_fwd_, lstm_bwd_;
    Eigen::VectorXd attn_query_;
    std::vector<Eigen::MatrixXd> gcn_weights_;
    std::map<signals::Modality, Eigen::MatrixXd> proj_;
};

// ---- trainable fusion + head ---------------------------------------------

struct FitConfig {
    int epochs = 200;
    double lr = 0.1;
    std::uint64_t seed = 0;
    LossWeights loss;
};

struct TrainedFusion {
    attention::ProjectionSet proj;
    PredictionHead head;
    std::vector<double> loss_history;
    double final_lr = 0.0;
};

struct FusionGradients {
    std::vector<Eigen::MatrixXd> d_wq, d_wk, d_wv;
    Eigen::VectorXd d_w_out;
    double d_b_out = 0.0;
    double loss = 0.0;
};

// Forward + analytic gradients of the composite loss for one subject.
FusionGradients fusion_loss_gradients(
    const std::vector<Eigen::VectorXd>& embeddings,
    const std::vector<bool>& present, const attention::ProjectionSet& proj,
    const PredictionHead& head, int label, double stroke_residual,
    const LossWeights& lw);

// Full-batch gradient descent over head and attention projections;
// extractor features stay fixed. The learning rate is halved whenever an
// epoch fails to decrease the loss, so the recorded history is monotone
// within 1e-9.
TrainedFusion train_head(const std::vector<std::vector<Eigen::VectorXd>>& features,
                         const std::vector<std::vector<bool>>& masks,
                         const std::vector<int>& labels,
                         const std::vector<double>& stroke_residuals,
                         int heads, int d_k, const FitConfig& cfg);

double fusion_predict(const std::vector<Eigen::VectorXd>& embeddings,
                      const std::vector<bool>& present,
                      const attention::ProjectionSet& proj,
                      const PredictionHead& head);

// ---- metrics and baseline ------------------------------------------------

struct MetricsReport {
    double acc = 0.0, auc = 0.0, f1 = 0.0, precision = 0.0, recall = 0.0;
    long tp = 0, fp = 0, fn = 0, tn = 0;
    bool degenerate = false;  // a denominator was zero, metric forced to 0
};

MetricsReport metrics(const std::vector<double>& scores,
                      const std::vector<int>& labels, double threshold = 0.5);

// Mann-Whitney AUC with average ranks for ties.
double rank_auc(const std::vector<double>& scores,
                const std::vector<int>& labels);

struct LogisticModel {
    Eigen::VectorXd w;
    double b = 0.0;
};

LogisticModel logistic_baseline_fit(const Eigen::MatrixXd& features,
                                    const std::vector<int>& labels,
                                    int epochs = 500, double lr = 0.1);
double logistic_baseline_predict(const Eigen::VectorXd& f,
                                 const LogisticModel& m);

// ---- composite risk index ------------------------------------------------

struct CohortZscore {
    Eigen::MatrixXd z;            // subjects x biomarkers
    std::vector<bool> dropped;    // zero cohort variance, term excluded
};

CohortZscore cohort_zscore(const Eigen::MatrixXd& biomarkers);

// sigmoid(logit(model_prob) + sum_i weights_i * z_i) over retained terms.
double composite_risk_index(const Eigen::VectorXd& z_row,
                            const std::vector<bool>& dropped,
                            double model_prob, const Eigen::VectorXd& weights);

}  // namespace gsm::model
