#pragma once

#include "gaitid/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace gaitid {

struct KernelParams {
    double a = 1.0;    // cosine scale
    double b = 1.0;    // exponential decay scale
    double C = 100.0;  // ridge regularization coefficient

    void validate() const {
        if (!(a > 0.0 && b > 0.0 && C > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(C))
            throw InvalidParameterError("kernel parameters a, b, C must be positive and finite");
    }
};

/// cos(r / a) * exp(-r / b) with r the squared distance.
inline double wavelet_kernel_sq(double sq_dist, const KernelParams& p) {
    return std::cos(sq_dist / p.a) * std::exp(-sq_dist / p.b);
}

template <class DerivedX, class DerivedY>
double wavelet_kernel(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                      const KernelParams& p) {
    if (x.size() != y.size()) throw ShapeError("kernel arguments differ in dimension");
    return wavelet_kernel_sq((x - y).squaredNorm(), p);
}

inline Matrix kernel_matrix(const Matrix& X1, const Matrix& X2, const KernelParams& p) {
    if (X1.cols() != X2.cols()) throw ShapeError("kernel matrix inputs differ in feature dimension");
    const Vector n1 = X1.rowwise().squaredNorm();
    const Vector n2 = X2.rowwise().squaredNorm();
    Matrix K = X1 * X2.transpose();
    for (Eigen::Index i = 0; i < K.rows(); ++i)
        for (Eigen::Index j = 0; j < K.cols(); ++j) {
            // Expanded form can go slightly negative from cancellation.
            const double sq = std::max(0.0, n1(i) + n2(j) - 2.0 * K(i, j));
            K(i, j) = wavelet_kernel_sq(sq, p);
        }
    if (&X1 == &X2)
        for (Eigen::Index i = 0; i < K.rows(); ++i) K(i, i) = 1.0;
    return K;
}

struct KELMModel {
    Matrix train_inputs;
    Matrix output_weights;  // N x K
    std::vector<std::string> classes;
    KernelParams params;
    /// Reciprocal condition estimate of (I/C + M) from the factorization that succeeded.
    double rcond = 0.0;
    double residual = 0.0;
};

struct Prediction {
    std::vector<std::string> labels;
    std::vector<std::size_t> class_index;
    Matrix scores;  // n x K
};

/// Solves (I/C + M) W = T with +1/-1 one-hot targets. LDLT is tried first; the kernel can be
/// indefinite, so a partial-pivot LU takes over when the LDLT residual is not acceptable.
inline KELMModel kelm_train(const Matrix& X, const std::vector<std::string>& labels, const KernelParams& params) {
    params.validate();
    const Eigen::Index N = X.rows();
    if (static_cast<std::size_t>(N) != labels.size()) throw ShapeError("label count differs from row count");
    if (N < 2) throw InvalidLabelError("KELM needs at least 2 training rows");
    KELMModel model;
    model.params = params;
    model.classes = labels;
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    if (model.classes.size() < 2) throw InvalidLabelError("KELM needs at least 2 distinct labels");
    const auto K = static_cast<Eigen::Index>(model.classes.size());

    Matrix T = Matrix::Constant(N, K, -1.0);
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto it = std::lower_bound(model.classes.begin(), model.classes.end(), labels[static_cast<std::size_t>(i)]);
        T(i, it - model.classes.begin()) = 1.0;
    }

    Eigen::MatrixXd A = kernel_matrix(X, X, params);
    A.diagonal().array() += 1.0 / params.C;
    const double scale = std::max(1.0, T.cwiseAbs().maxCoeff());
    auto residual_of = [&](const Eigen::MatrixXd& W) { return (A * W - T).cwiseAbs().maxCoeff(); };

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    Eigen::MatrixXd W;
    double res = std::numeric_limits<double>::infinity();
    if (ldlt.info() == Eigen::Success) {
        W = ldlt.solve(T);
        res = residual_of(W);
        model.rcond = ldlt.rcond();
    }
    if (!(res < 1e-8 * scale)) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        Eigen::MatrixXd W2 = lu.solve(T);
        // One step of iterative refinement.
        W2 += lu.solve(T - A * W2);
        const double res2 = residual_of(W2);
        if (res2 < res) {
            W = std::move(W2);
            res = res2;
            model.rcond = lu.rcond();
        }
    }
    if (!(res < 1e-6)) {
        throw TrainingError("KELM system solve failed: residual " + std::to_string(res) + ", rcond " +
                            std::to_string(model.rcond));
    }
    model.residual = res;
    model.output_weights = std::move(W);
    model.train_inputs = X;
    return model;
}

inline Prediction kelm_predict(const KELMModel& model, const Matrix& X) {
    if (X.cols() != model.train_inputs.cols()) throw ShapeError("prediction input dimension mismatch");
    Prediction out;
    out.scores = kernel_matrix(X, model.train_inputs, model.params) * model.output_weights;
    out.labels.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < out.scores.cols(); ++k)
            if (out.scores(i, k) > out.scores(i, best)) best = k;
        out.class_index.push_back(static_cast<std::size_t>(best));
        out.labels.push_back(model.classes[static_cast<std::size_t>(best)]);
    }
    return out;
}

inline double accuracy(const std::vector<std::string>& predicted, const std::vector<std::string>& truth) {
    if (predicted.size() != truth.size()) throw ShapeError("accuracy inputs differ in length");
    if (predicted.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace gaitid
