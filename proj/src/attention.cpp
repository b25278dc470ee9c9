#include "gsm/attention.hpp"

#include <cmath>
#include <limits>

#include "gsm/errors.hpp"

namespace gsm::attention {

void ProjectionSet::validate() const {
    if (w_q.empty() || w_q.size() != w_k.size() || w_q.size() != w_v.size())
        throw ConfigError("ProjectionSet: need matching W_Q/W_K/W_V per head");
    const auto rows = w_q[0].rows();
    const auto cols = w_q[0].cols();
    for (std::size_t h = 0; h < w_q.size(); ++h) {
        if (w_q[h].rows() != rows || w_k[h].rows() != rows ||
            w_v[h].rows() != rows || w_q[h].cols() != cols ||
            w_k[h].cols() != cols || w_v[h].cols() != cols)
            throw ConfigError("ProjectionSet: inconsistent head dimensions");
    }
}

AttentionOutput scaled_dot_attention(const Eigen::MatrixXd& q,
                                     const Eigen::MatrixXd& k,
                                     const Eigen::MatrixXd& v,
                                     const std::vector<bool>* key_mask) {
    if (q.cols() != k.cols())
        throw DataError("scaled_dot_attention: Q/K column mismatch");
    if (k.rows() != v.rows())
        throw DataError("scaled_dot_attention: K/V row mismatch");
    if (key_mask && static_cast<Eigen::Index>(key_mask->size()) != k.rows())
        throw DataError("scaled_dot_attention: mask length mismatch");

    const double scale = 1.0 / std::sqrt(double(q.cols()));
    Eigen::MatrixXd logits = scale * (q * k.transpose());
    if (key_mask) {
        for (Eigen::Index j = 0; j < k.rows(); ++j)
            if (!(*key_mask)[j])
                logits.col(j).setConstant(-std::numeric_limits<double>::infinity());
    }

    AttentionOutput out;
    out.weights.resize(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double mx = logits.row(i).maxCoeff();
        Eigen::ArrayXd e = (logits.row(i).array() - mx).exp();
        out.weights.row(i) = (e / e.sum()).matrix();
    }
    out.values = out.weights * v;
    return out;
}

std::pair<FusedEmbedding, AttentionOutput> cross_modal_fuse(
    const std::vector<Eigen::VectorXd>& embeddings,
    const std::vector<bool>& present, const ProjectionSet& proj) {
    proj.validate();
    if (embeddings.empty() || embeddings.size() != present.size())
        throw DataError("cross_modal_fuse: embeddings/mask mismatch");
    const auto d_model = embeddings[0].size();
    if (proj.w_q[0].rows() != d_model)
        throw ConfigError("cross_modal_fuse: projection rows != d_model");
    bool any_present = false;
    for (bool b : present) any_present = any_present || b;
    if (!any_present) throw DataError("cross_modal_fuse: all modalities missing");

    const auto m = static_cast<Eigen::Index>(embeddings.size());
    Eigen::MatrixXd tokens(m, d_model);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (embeddings[i].size() != d_model)
            throw DataError("cross_modal_fuse: inconsistent embedding widths");
        if (present[i])
            tokens.row(i) = embeddings[i].transpose();
        else
            tokens.row(i).setZero();
    }

    const int heads = proj.heads();
    const int dk = proj.d_k();
    Eigen::MatrixXd head_out(m, Eigen::Index(heads) * dk);
    Eigen::MatrixXd mean_weights = Eigen::MatrixXd::Zero(m, m);
    for (int h = 0; h < heads; ++h) {
        AttentionOutput o = scaled_dot_attention(
            tokens * proj.w_q[h], tokens * proj.w_k[h], tokens * proj.w_v[h],
            &present);
        head_out.middleCols(Eigen::Index(h) * dk, dk) = o.values;
        mean_weights += o.weights;
    }
    mean_weights /= double(heads);

    FusedEmbedding fused;
    fused.mask = present;
    fused.z.resize(m * d_model + head_out.size());
    for (Eigen::Index i = 0; i < m; ++i)
        fused.z.segment(i * d_model, d_model) = tokens.row(i).transpose();
    for (Eigen::Index i = 0; i < m; ++i)
        fused.z.segment(m * d_model + i * head_out.cols(), head_out.cols()) =
            head_out.row(i).transpose();

    return {std::move(fused), AttentionOutput{head_out, mean_weights}};
}

double attention_entropy(const AttentionOutput& out) {
    if (out.weights.rows() == 0)
        throw DataError("attention_entropy: empty weights");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < out.weights.rows(); ++i) {
        double h = 0.0;
        for (Eigen::Index j = 0; j < out.weights.cols(); ++j) {
            const double w = out.weights(i, j);
            if (w > 0.0) h -= w * std::log(w);
        }
        acc += h;
    }
    return acc / double(out.weights.rows());
}

}  // namespace gsm::attention
