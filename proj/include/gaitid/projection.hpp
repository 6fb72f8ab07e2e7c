#pragma once

// Distance-preserving reduction: Sammon stress, the Extended Sammon Projection fit and its
// out-of-sample transform, and the PCA baseline used both on its own and as ESP's start.

#include "gaitid/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gaitid {

/// Replacement for zero high-dimensional distances.
inline constexpr double kDistanceEpsilon = 1e-12;

inline Matrix pairwise_distances(const Matrix& X) {
    if (X.rows() < 2) throw ShapeError("pairwise distances need at least 2 rows");
    const Eigen::Index n = X.rows();
    Matrix D(n, n);
    for (Eigen::Index i = 0; i < n; ++i) D.row(i) = (X.rowwise() - X.row(i)).rowwise().norm().transpose();
    D.diagonal().setZero();
    return D;
}

struct StressResult {
    double stress = 0.0;
    /// Number of high-dimensional pairs replaced by the epsilon guard.
    std::size_t guarded_pairs = 0;
};

/// E = (1 / sum d_ij) * sum_{i<j} (d_ij - d*_ij)^2 / d_ij, with d from `D_high`.
inline StressResult sammon_stress_checked(const Matrix& D_high, const Matrix& D_low) {
    if (D_high.rows() != D_high.cols() || D_low.rows() != D_low.cols() || D_high.rows() != D_low.rows())
        throw ShapeError("stress needs two square distance matrices of equal size");
    StressResult r;
    double c = 0.0;
    double acc = 0.0;
    const Eigen::Index n = D_high.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double d = D_high(i, j);
            if (d < kDistanceEpsilon) {
                d = kDistanceEpsilon;
                ++r.guarded_pairs;
            }
            const double diff = d - D_low(i, j);
            c += d;
            acc += diff * diff / d;
        }
    r.stress = c > 0.0 ? acc / c : 0.0;
    return r;
}

inline double sammon_stress(const Matrix& D_high, const Matrix& D_low) {
    return sammon_stress_checked(D_high, D_low).stress;
}

struct SammonDerivatives {
    Matrix gradient;      // n x m, dE/dy_pk
    Matrix hessian_diag;  // n x m, d2E/dy_pk^2
};

/// Analytic first and diagonal second derivatives of the Sammon stress with respect to
/// the low-dimensional coordinates `Y`.
inline SammonDerivatives sammon_derivatives(const Matrix& D_high, const Matrix& Y) {
    const Eigen::Index n = Y.rows();
    const Eigen::Index m = Y.cols();
    if (D_high.rows() != n || D_high.cols() != n) throw ShapeError("distance matrix does not match configuration");
    double c = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) c += std::max(D_high(i, j), kDistanceEpsilon);

    SammonDerivatives out{Matrix::Zero(n, m), Matrix::Zero(n, m)};
    Matrix diff(n, m);
    for (Eigen::Index p = 0; p < n; ++p) {
        diff = (-(Y.rowwise() - Y.row(p)));  // row j: y_p - y_j
        const Eigen::ArrayXd dl = diff.rowwise().norm().array().max(kDistanceEpsilon);
        const Eigen::ArrayXd dh = D_high.row(p).transpose().array().max(kDistanceEpsilon);
        const Eigen::ArrayXd dd = dh - dl;
        Eigen::ArrayXd inv = 1.0 / (dh * dl);
        inv(p) = 0.0;
        const Eigen::ArrayXd factor = inv * (1.0 + dd / dl) / dl;
        out.gradient.row(p) = (dd * inv).matrix().transpose() * diff;
        out.hessian_diag.row(p) =
            RowVector::Constant(m, (inv * dd).sum()) - factor.matrix().transpose() * diff.array().square().matrix();
    }
    const double scale = -2.0 / c;
    out.gradient *= scale;
    out.hessian_diag *= scale;
    return out;
}

struct PCAModel {
    Vector mean;
    Matrix components;  // d x k, orthonormal columns
    Vector eigenvalues;  // k, descending
    double total_variance = 0.0;

    Eigen::Index input_dim() const noexcept { return components.rows(); }
    Eigen::Index output_dim() const noexcept { return components.cols(); }

    double explained_variance_ratio() const {
        return total_variance > 0.0 ? eigenvalues.sum() / total_variance : 1.0;
    }
};

/// Top-k eigenvectors of the sample covariance. Each component's largest-magnitude entry is
/// made positive so the basis is reproducible.
inline PCAModel pca_fit(const Matrix& X, Eigen::Index k) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 2) throw InvalidParameterError("PCA needs at least 2 rows");
    if (k < 1 || k > std::min(n - 1, d))
        throw InvalidParameterError("PCA component count " + std::to_string(k) + " exceeds min(n - 1, d) = " +
                                    std::to_string(std::min(n - 1, d)));
    PCAModel model;
    model.mean = X.colwise().mean().transpose();
    const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw DegenerateInputError("covariance eigendecomposition failed");
    model.total_variance = cov.trace();
    model.components.resize(d, k);
    model.eigenvalues.resize(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const Eigen::Index src = d - 1 - c;  // eigenvalues come ascending
        Eigen::VectorXd v = es.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        model.components.col(c) = v;
        model.eigenvalues(c) = std::max(0.0, es.eigenvalues()(src));
    }
    return model;
}

inline Matrix pca_transform(const PCAModel& model, const Matrix& X) {
    if (X.cols() != model.input_dim()) throw ShapeError("PCA input dimension mismatch");
    return (X.rowwise() - model.mean.transpose()) * model.components;
}

inline Matrix pca_reconstruct(const PCAModel& model, const Matrix& Z) {
    return (Z * model.components.transpose()).rowwise() + model.mean.transpose();
}

struct EspOptions {
    Eigen::Index target_dim = 2;
    double alpha = 0.35;
    std::size_t max_iter = 500;
    double rel_tol = 1e-6;
    /// Cap on anchors used by the O(n^2) fit; 0 keeps every row. Rows beyond the cap are
    /// placed with the out-of-sample transform by `esp_fit_transform`.
    std::size_t max_anchors = 0;
    std::size_t transform_max_iter = 100;
    /// Step halvings tried before an iteration is declared stalled.
    int max_halvings = 30;
};

struct ESPModel {
    Matrix anchors_high;
    Matrix anchors_low;
    double alpha = 0.35;
    std::vector<double> stress_trace;
    double distance_sum = 0.0;
    PCAModel init;
    std::size_t transform_max_iter = 100;
    double rel_tol = 1e-6;
    std::size_t guarded_pairs = 0;
    std::size_t perturbed_rows = 0;
    /// Row index in the fitting input of each anchor.
    std::vector<std::size_t> anchor_rows;

    Eigen::Index input_dim() const noexcept { return anchors_high.cols(); }
    Eigen::Index output_dim() const noexcept { return anchors_low.cols(); }
};

namespace detail {

inline std::vector<std::size_t> spread_indices(std::size_t n, std::size_t cap) {
    std::vector<std::size_t> idx;
    if (cap == 0 || cap >= n) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    idx.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i) idx.push_back(i * n / cap);
    return idx;
}

/// Nudges exact duplicate rows apart by 1e-9 of each column's range.
inline std::size_t separate_duplicates(Matrix& X) {
    const RowVector range = X.colwise().maxCoeff() - X.colwise().minCoeff();
    std::size_t moved = 0;
    for (Eigen::Index i = 1; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if ((X.row(i) - X.row(j)).squaredNorm() == 0.0) {
                for (Eigen::Index c = 0; c < X.cols(); ++c) {
                    const double sign = ((i + c) % 2 == 0) ? 1.0 : -1.0;
                    X(i, c) += sign * 1e-9 * range(c) * static_cast<double>(1 + (i % 7));
                }
                ++moved;
                break;
            }
        }
    }
    return moved;
}

}  // namespace detail

/// Fits the projection by pseudo-Newton descent on Sammon stress from a PCA start:
/// y_pk -= alpha * g_pk / |h_pk|. A step that would raise the stress is retried at half
/// the step size, so the recorded stress never increases.
inline ESPModel esp_fit(const Matrix& X, const EspOptions& opt) {
    const Eigen::Index m = opt.target_dim;
    if (m < 1 || m >= X.cols()) throw InvalidParameterError("ESP target dimension must be in [1, d)");
    if (!(opt.alpha > 0.0 && opt.alpha <= 1.0)) throw InvalidParameterError("ESP alpha must lie in (0, 1]");
    const auto idx = detail::spread_indices(static_cast<std::size_t>(X.rows()), opt.max_anchors);
    const auto n = static_cast<Eigen::Index>(idx.size());
    if (n <= m) throw InvalidParameterError("ESP needs more rows than target dimensions");

    ESPModel model;
    model.alpha = opt.alpha;
    model.transform_max_iter = opt.transform_max_iter;
    model.rel_tol = opt.rel_tol;
    model.anchor_rows = idx;
    model.anchors_high.resize(n, X.cols());
    for (Eigen::Index r = 0; r < n; ++r) model.anchors_high.row(r) = X.row(static_cast<Eigen::Index>(idx[r]));
    if ((model.anchors_high.colwise().maxCoeff() - model.anchors_high.colwise().minCoeff()).maxCoeff() == 0.0)
        throw DegenerateInputError("all ESP input rows are identical");
    Matrix work = model.anchors_high;
    model.perturbed_rows = detail::separate_duplicates(work);

    const Matrix D = pairwise_distances(work);
    model.init = pca_fit(work, m);
    Matrix Y = pca_transform(model.init, work);

    auto st = sammon_stress_checked(D, pairwise_distances(Y));
    model.guarded_pairs = st.guarded_pairs;
    double stress = st.stress;
    model.distance_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) model.distance_sum += std::max(D(i, j), kDistanceEpsilon);
    model.stress_trace.push_back(stress);

    Matrix step(n, m);
    Matrix trial(n, m);
    for (std::size_t it = 0; it < opt.max_iter && stress > 0.0; ++it) {
        const auto der = sammon_derivatives(D, Y);
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index k = 0; k < m; ++k) {
                const double h = std::max(std::abs(der.hessian_diag(p, k)), 1e-12);
                step(p, k) = -opt.alpha * der.gradient(p, k) / h;
            }
        double scale = 1.0;
        bool accepted = false;
        double next = stress;
        for (int tries = 0; tries <= opt.max_halvings; ++tries, scale *= 0.5) {
            trial = Y + scale * step;
            next = sammon_stress(D, pairwise_distances(trial));
            if (std::isfinite(next) && next <= stress) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        Y.swap(trial);
        const double improvement = stress > 0.0 ? (stress - next) / stress : 0.0;
        stress = next;
        model.stress_trace.push_back(stress);
        if (improvement < opt.rel_tol) break;
    }
    model.anchors_low = std::move(Y);
    return model;
}

namespace detail {

inline double point_stress(const Matrix& anchors_low, const Eigen::ArrayXd& d_high, const RowVector& y) {
    const Eigen::ArrayXd dl = (anchors_low.rowwise() - y).rowwise().norm().array();
    return ((d_high - dl).square() / d_high).sum();
}

}  // namespace detail

/// Stress between one new point and the fixed anchors (unnormalized).
inline double esp_point_stress(const ESPModel& model, const RowVector& x_new, const RowVector& y) {
    const Eigen::ArrayXd d = (model.anchors_high.rowwise() - x_new).rowwise().norm().array().max(kDistanceEpsilon);
    return detail::point_stress(model.anchors_low, d, y);
}

/// Places a new point by minimizing its stress terms against the fixed anchors, starting
/// from its PCA coordinates. A point coinciding with an anchor takes that anchor's position.
inline RowVector esp_transform(const ESPModel& model, const RowVector& x_new) {
    if (x_new.size() != model.input_dim()) throw ShapeError("ESP input dimension mismatch");
    const Eigen::Index m = model.output_dim();
    const Eigen::ArrayXd d = (model.anchors_high.rowwise() - x_new).rowwise().norm().array();
    Eigen::Index nearest = 0;
    if (d.minCoeff(&nearest) < kDistanceEpsilon) return model.anchors_low.row(nearest);
    RowVector y = ((x_new - model.init.mean.transpose()) * model.init.components);
    double e = detail::point_stress(model.anchors_low, d, y);
    RowVector trial(m);
    Matrix diff(model.anchors_low.rows(), m);
    for (std::size_t it = 0; it < model.transform_max_iter && e > 0.0; ++it) {
        diff = -(model.anchors_low.rowwise() - y);  // row j: y - a_j
        const Eigen::ArrayXd dl = diff.rowwise().norm().array().max(kDistanceEpsilon);
        const Eigen::ArrayXd dd = d - dl;
        const Eigen::ArrayXd inv = 1.0 / (d * dl);
        const Eigen::ArrayXd factor = inv * (1.0 + dd / dl) / dl;
        const RowVector g = (dd * inv).matrix().transpose() * diff;
        const RowVector h =
            RowVector::Constant(m, (inv * dd).sum()) - factor.matrix().transpose() * diff.array().square().matrix();
        // Common factor -2 of both derivatives cancels in g / |h| except for the sign of g.
        const RowVector step = model.alpha * (g.array() / h.array().abs().max(1e-12)).matrix();
        double scale = 1.0;
        bool accepted = false;
        double next = e;
        for (int tries = 0; tries <= 30; ++tries, scale *= 0.5) {
            trial = y + scale * step;
            next = detail::point_stress(model.anchors_low, d, trial);
            if (std::isfinite(next) && next <= e) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        const double improvement = (e - next) / e;
        y = trial;
        e = next;
        if (improvement < model.rel_tol) break;
    }
    return y;
}

inline Matrix esp_transform(const ESPModel& model, const Matrix& X) {
    if (X.cols() != model.input_dim()) throw ShapeError("ESP input dimension mismatch");
    Matrix out(X.rows(), model.output_dim());
    for (Eigen::Index r = 0; r < X.rows(); ++r) out.row(r) = esp_transform(model, RowVector(X.row(r)));
    return out;
}

struct EspFitTransform {
    ESPModel model;
    Matrix embedding;
};

/// Fit on (at most `max_anchors`) rows of X and return coordinates for every row.
inline EspFitTransform esp_fit_transform(const Matrix& X, const EspOptions& opt) {
    EspFitTransform out{esp_fit(X, opt), Matrix(X.rows(), opt.target_dim)};
    std::vector<Eigen::Index> anchor_of(static_cast<std::size_t>(X.rows()), -1);
    for (std::size_t a = 0; a < out.model.anchor_rows.size(); ++a)
        anchor_of[out.model.anchor_rows[a]] = static_cast<Eigen::Index>(a);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        const auto a = anchor_of[static_cast<std::size_t>(r)];
        out.embedding.row(r) = a >= 0 ? RowVector(out.model.anchors_low.row(a))
                                      : esp_transform(out.model, RowVector(X.row(r)));
    }
    return out;
}

}  // namespace gaitid
