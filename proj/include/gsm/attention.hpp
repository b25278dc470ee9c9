#pragma once

#include <vector>

#include <Eigen/Dense>

namespace gsm::attention {

struct AttentionOutput {
    Eigen::MatrixXd values;   // one row per query
    Eigen::MatrixXd weights;  // row-stochastic, one row per query
};

// Per-head projections, all d_model x d_k.
struct ProjectionSet {
    std::vector<Eigen::MatrixXd> w_q, w_k, w_v;

    int heads() const { return static_cast<int>(w_q.size()); }
    int d_k() const { return w_q.empty() ? 0 : static_cast<int>(w_q[0].cols()); }
    void validate() const;
};

struct FusedEmbedding {
    Eigen::VectorXd z;             // concat(raw embeddings, attention rows)
    std::vector<bool> mask;        // true = modality present
};

// softmax(Q K^T / sqrt(d_k)) V with row-max subtraction. An optional key
// mask assigns -inf logits to masked-out keys.
AttentionOutput scaled_dot_attention(const Eigen::MatrixXd& q,
                                     const Eigen::MatrixXd& k,
                                     const Eigen::MatrixXd& v,
                                     const std::vector<bool>* key_mask = nullptr);

// Modality embeddings stacked as tokens, multi-head self-attention over
// them, heads concatenated, result concatenated with the raw embeddings.
// Missing modalities enter as zero tokens and are masked out as keys.
// The returned AttentionOutput carries head-averaged weights.
std::pair<FusedEmbedding, AttentionOutput> cross_modal_fuse(
    const std::vector<Eigen::VectorXd>& embeddings,
    const std::vector<bool>& present, const ProjectionSet& proj);

// Mean over query rows of the Shannon entropy of each weight row.
double attention_entropy(const AttentionOutput& out);

}  // namespace gsm::attention
