#include "gsm/manifold.hpp"

#include <cmath>
#include <utility>

#include "gsm/errors.hpp"

namespace gsm::manifold {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kEigFloor = 1e-12;

void check_symmetric(const Eigen::MatrixXd& m, const char* who) {
    if (m.rows() != m.cols())
        throw DataError(std::string(who) + ": matrix is not square");
    const double dev = (m - m.transpose()).cwiseAbs().maxCoeff();
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    if (dev > kSymTol * scale)
        throw DataError(std::string(who) + ": matrix is not symmetric");
}

// Applies fn to the eigenvalues of a symmetric matrix.
Eigen::MatrixXd sym_fun(const Eigen::MatrixXd& m, double (*fn)(double)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = fn(ev[i]);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double floored_log(double x) { return std::log(std::max(x, kEigFloor)); }
double inv_sqrt(double x) { return 1.0 / std::sqrt(std::max(x, kEigFloor)); }
double pos_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }

}  // namespace

SpdMatrix::SpdMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    check_symmetric(m_, "SpdMatrix");
    m_ = 0.5 * (m_ + m_.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw DataError("SpdMatrix: smallest eigenvalue is not positive");
}

GroupElement::GroupElement(Eigen::MatrixXd g) : g_(std::move(g)) {
    if (g_.rows() != g_.cols())
        throw DataError("GroupElement: matrix is not square");
    if (std::abs(g_.determinant()) <= 1e-12)
        throw DataError("GroupElement: matrix is singular");
}

SpdMatrix GroupElement::act(const SpdMatrix& x) const {
    if (g_.rows() != x.dim())
        throw DataError("GroupElement::act: dimension mismatch");
    return SpdMatrix(g_ * x.mat() * g_.transpose());
}

Eigen::MatrixXd spd_log(const SpdMatrix& a) {
    return sym_fun(a.mat(), floored_log);
}

SpdMatrix spd_exp(const Eigen::MatrixXd& sym) {
    check_symmetric(sym, "spd_exp");
    return SpdMatrix(sym_fun(sym, [](double x) { return std::exp(x); }));
}

double geodesic_distance(const SpdMatrix& a, const SpdMatrix& b) {
    if (a.dim() != b.dim())
        throw DataError("geodesic_distance: dimension mismatch");
    // Extended precision keeps the congruence-invariance defect under 1e-8
    // even for ill-conditioned inputs.
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const MatL am = a.mat().cast<long double>();
    const MatL bm = b.mat().cast<long double>();
    Eigen::SelfAdjointEigenSolver<MatL> ea(am);
    MatL ais = ea.eigenvectors();
    for (Eigen::Index i = 0; i < ais.cols(); ++i)
        ais.col(i) /= std::sqrt(std::max<long double>(ea.eigenvalues()[i],
                                                      kEigFloor));
    const MatL w = ais.transpose() * bm * ais;
    // w is SPD; its log eigenvalues give the distance directly.
    Eigen::SelfAdjointEigenSolver<MatL> es(w, Eigen::EigenvaluesOnly);
    long double s = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const long double l =
            std::log(std::max<long double>(es.eigenvalues()[i], kEigFloor));
        s += l * l;
    }
    return double(std::sqrt(s));
}

double log_euclidean_distance(const SpdMatrix& a, const SpdMatrix& b) {
    if (a.dim() != b.dim())
        throw DataError("log_euclidean_distance: dimension mismatch");
    return (spd_log(a) - spd_log(b)).norm();
}

FrechetResult frechet_mean_info(const std::vector<SpdMatrix>& points,
                                double tol, int max_iter) {
    if (points.empty())
        throw DataError("frechet_mean: empty point set");
    const int n = points.front().dim();
    for (const auto& p : points)
        if (p.dim() != n) throw DataError("frechet_mean: mixed dimensions");

    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : points) mu += p.mat();
    mu /= static_cast<double>(points.size());

    double step = 1.0;
    double prev_grad = std::numeric_limits<double>::infinity();
    FrechetResult res{SpdMatrix(mu)};
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::MatrixXd sqrt_mu = sym_fun(mu, pos_sqrt);
        const Eigen::MatrixXd isqrt_mu = sym_fun(mu, inv_sqrt);
        Eigen::MatrixXd tangent = Eigen::MatrixXd::Zero(n, n);
        for (const auto& p : points)
            tangent += sym_fun(isqrt_mu * p.mat() * isqrt_mu, floored_log);
        tangent /= static_cast<double>(points.size());

        const double grad = tangent.norm();
        res.iterations = it + 1;
        res.grad_norm = grad;
        if (grad < tol) {
            res.mean = SpdMatrix(mu);
            res.converged = true;
            return res;
        }
        if (grad >= prev_grad) step *= 0.5;
        prev_grad = grad;

        const Eigen::MatrixXd expo =
            sym_fun(step * tangent, [](double x) { return std::exp(x); });
        mu = sqrt_mu * expo * sqrt_mu;
        mu = 0.5 * (mu + mu.transpose().eval());
    }
    res.mean = SpdMatrix(mu);
    return res;
}

SpdMatrix frechet_mean(const std::vector<SpdMatrix>& points, double tol,
                       int max_iter) {
    FrechetResult r = frechet_mean_info(points, tol, max_iter);
    if (!r.converged)
        throw NumericError("frechet_mean: no convergence after " +
                           std::to_string(r.iterations) +
                           " iterations, grad norm " + std::to_string(r.grad_norm));
    return r.mean;
}

double curvature_proxy(const SpdMatrix& a, const SpdMatrix& b,
                       const SpdMatrix& c) {
    if (a.dim() != b.dim() || a.dim() != c.dim())
        throw DataError("curvature_proxy: dimension mismatch");
    const double dbc = geodesic_distance(b, c);
    if (dbc < 1e-9 || geodesic_distance(a, b) < 1e-9 ||
        geodesic_distance(a, c) < 1e-9)
        throw DataError("curvature_proxy: points are not pairwise distinct");

    const Eigen::MatrixXd isqrt_a = sym_fun(a.mat(), inv_sqrt);
    const Eigen::MatrixXd log_b = sym_fun(isqrt_a * b.mat() * isqrt_a, floored_log);
    const Eigen::MatrixXd log_c = sym_fun(isqrt_a * c.mat() * isqrt_a, floored_log);
    // ||Log_A B - Log_A C||_A in whitened coordinates.
    const double tangent_dist = (log_b - log_c).norm();
    return (dbc - tangent_dist) / dbc;
}

ManifoldEmbedding embed_modality(std::vector<SpdMatrix> covs,
                                 std::string modality) {
    if (covs.empty())
        throw DataError("embed_modality: empty covariance sequence");
    const int n = covs.front().dim();
    for (const auto& c : covs)
        if (c.dim() != n) throw DataError("embed_modality: mixed dimensions");
    return ManifoldEmbedding{std::move(covs), std::move(modality)};
}

namespace {

double dist_by(const SpdMatrix& a, const SpdMatrix& b, Metric metric) {
    return metric == Metric::AffineInvariant ? geodesic_distance(a, b)
                                             : log_euclidean_distance(a, b);
}

}  // namespace

Eigen::MatrixXd pairwise_distances_serial(const std::vector<SpdMatrix>& pts,
                                          Metric metric) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d(i, j) = d(j, i) = dist_by(pts[i], pts[j], metric);
    return d;
}

Eigen::MatrixXd pairwise_distances(const std::vector<SpdMatrix>& pts,
                                   Metric metric) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d(i, j) = dist_by(pts[i], pts[j], metric);
    d = d + Eigen::MatrixXd(d.transpose());
    return d;
}

}  // namespace gsm::manifold
