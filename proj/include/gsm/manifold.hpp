#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gsm::manifold {

// Symmetric positive definite matrix, validated at construction.
// Symmetry tolerance 1e-10; smallest eigenvalue must be > 0.
class SpdMatrix {
public:
    explicit SpdMatrix(Eigen::MatrixXd m);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& mat() const { return m_; }

private:
    Eigen::MatrixXd m_;
};

// Invertible matrix acting on SPD points by congruence X -> G X G^T.
class GroupElement {
public:
    explicit GroupElement(Eigen::MatrixXd g);

    const Eigen::MatrixXd& mat() const { return g_; }
    SpdMatrix act(const SpdMatrix& x) const;

private:
    Eigen::MatrixXd g_;
};

struct ManifoldEmbedding {
    std::vector<SpdMatrix> points;
    std::string modality;
};

// Matrix log/exp through the eigendecomposition. Eigenvalues are floored
// at 1e-12 before the log.
Eigen::MatrixXd spd_log(const SpdMatrix& a);
SpdMatrix spd_exp(const Eigen::MatrixXd& sym);

// Affine-invariant geodesic distance ||log(A^{-1/2} B A^{-1/2})||_F.
double geodesic_distance(const SpdMatrix& a, const SpdMatrix& b);

// Log-Euclidean alternative ||log A - log B||_F (faster, not congruence
// invariant).
double log_euclidean_distance(const SpdMatrix& a, const SpdMatrix& b);

enum class Metric { AffineInvariant, LogEuclidean };

struct FrechetResult {
    SpdMatrix mean;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;
};

// Karcher mean by Riemannian gradient descent, initialized at the
// arithmetic mean; step 1, halved on non-decrease of the gradient norm.
FrechetResult frechet_mean_info(const std::vector<SpdMatrix>& points,
                                double tol = 1e-10, int max_iter = 200);
SpdMatrix frechet_mean(const std::vector<SpdMatrix>& points,
                       double tol = 1e-10, int max_iter = 200);

// Normalized tangent-comparison defect at base point A:
//   (d(B,C) - ||Log_A B - Log_A C||_A) / d(B,C).
// Nonnegative up to roundoff for the affine-invariant metric.
double curvature_proxy(const SpdMatrix& a, const SpdMatrix& b,
                       const SpdMatrix& c);

ManifoldEmbedding embed_modality(std::vector<SpdMatrix> covs,
                                 std::string modality);

// Full pairwise distance matrix; serial reference and OpenMP kernel.
Eigen::MatrixXd pairwise_distances_serial(const std::vector<SpdMatrix>& pts,
                                          Metric metric = Metric::AffineInvariant);
Eigen::MatrixXd pairwise_distances(const std::vector<SpdMatrix>& pts,
                                   Metric metric = Metric::AffineInvariant);

}  // namespace gsm::manifold
