#include "gaitid/kelm.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace gaitid;

namespace {

Matrix random_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(n, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

/// Two tight clusters, 10 points each, far apart relative to b.
struct Clusters {
    Matrix X{20, 2};
    std::vector<std::string> y;
};

Clusters clusters(std::uint64_t seed) {
    Clusters c;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 0.05);
    for (int i = 0; i < 20; ++i) {
        const double cx = i < 10 ? 0.0 : 5.0;
        c.X.row(i) << cx + z(rng), z(rng);
        c.y.push_back(i < 10 ? "left" : "right");
    }
    return c;
}

}  // namespace

TEST(Kernel, SelfSimilarityIsOne) {
    const RowVector x = random_matrix(1, 5, 1);
    EXPECT_EQ(wavelet_kernel(x, x, {0.3, 7.0, 1.0}), 1.0);
}

TEST(Kernel, CosineZero) {
    const KernelParams p{2.0, 0.5, 1.0};
    RowVector x = RowVector::Zero(1), y(1);
    y(0) = std::sqrt(std::numbers::pi * p.a / 2.0);
    EXPECT_NEAR(wavelet_kernel(x, y, p), 0.0, 1e-15);
}

TEST(Kernel, HandValue) {
    RowVector x(2), y(2);
    x << 0, 0;
    y << 1, 1;
    EXPECT_NEAR(wavelet_kernel(x, y, {4.0, 2.0, 1.0}), std::cos(0.5) * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(wavelet_kernel(x, y, {4.0, 2.0, 1.0}), 0.32282, 1e-4);
}

TEST(Kernel, SymmetricAndBounded) {
    const Matrix X = random_matrix(30, 3, 2);
    const KernelParams p{0.05, 0.8, 1.0};
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.rows(); ++j) {
            const double k = wavelet_kernel(X.row(i), X.row(j), p);
            EXPECT_EQ(k, wavelet_kernel(X.row(j), X.row(i), p));
            EXPECT_LE(std::abs(k), 1.0);
        }
}

TEST(Kernel, DimensionMismatch) {
    EXPECT_THROW(wavelet_kernel(RowVector::Zero(2), RowVector::Zero(3), {}), ShapeError);
    EXPECT_THROW(kernel_matrix(Matrix::Zero(2, 2), Matrix::Zero(2, 3), {}), ShapeError);
}

TEST(KernelMatrix, MatchesScalarOracle) {
    const Matrix A = random_matrix(6, 4, 3), B = random_matrix(5, 4, 4);
    const KernelParams p{0.7, 1.3, 1.0};
    const Matrix K = kernel_matrix(A, B, p);
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 5; ++j) {
            double sq = 0.0;
            for (Eigen::Index k = 0; k < 4; ++k) sq += (A(i, k) - B(j, k)) * (A(i, k) - B(j, k));
            EXPECT_NEAR(K(i, j), std::cos(sq / p.a) * std::exp(-sq / p.b), 1e-12);
        }
}

TEST(KernelMatrix, UnitDiagonalAndShape) {
    const Matrix A = random_matrix(7, 3, 5);
    const Matrix K = kernel_matrix(A, A, {});
    for (Eigen::Index i = 0; i < 7; ++i) EXPECT_EQ(K(i, i), 1.0);
    EXPECT_LT((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(kernel_matrix(A.topRows(1), A.bottomRows(1), {}).size(), 1);
}

TEST(Train, SeparatedClustersFitPerfectly) {
    const auto c = clusters(1);
    const auto model = kelm_train(c.X, c.y, {1.0, 0.5, 100.0});
    EXPECT_LT(model.residual, 1e-6);
    const auto pred = kelm_predict(model, c.X);
    EXPECT_EQ(pred.labels, c.y);
    EXPECT_EQ(pred.scores.rows(), 20);
    EXPECT_EQ(pred.scores.cols(), 2);
}

// Dense-solver oracle: the stored weights solve the regularized system.
TEST(Train, WeightsSolveRegularizedSystem) {
    const auto c = clusters(2);
    const KernelParams p{0.9, 0.4, 10.0};
    const auto model = kelm_train(c.X, c.y, p);
    Eigen::MatrixXd A(20, 20);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) A(i, j) = wavelet_kernel(c.X.row(i), c.X.row(j), p) + (i == j ? 1.0 / p.C : 0.0);
    Eigen::MatrixXd T = Eigen::MatrixXd::Constant(20, 2, -1.0);
    for (int i = 0; i < 20; ++i) T(i, c.y[std::size_t(i)] == "left" ? 0 : 1) = 1.0;
    const Eigen::MatrixXd W = A.fullPivLu().solve(T);
    EXPECT_LT((Eigen::MatrixXd(model.output_weights) - W).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((A * Eigen::MatrixXd(model.output_weights) - T).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Train, ConflictingDuplicates) {
    Matrix X(4, 2);
    X << 0, 0, 0, 0, 1, 1, 1, 1;
    const std::vector<std::string> y{"a", "b", "a", "b"};
    const auto model = kelm_train(X, y, {1.0, 1.0, 1.0});
    EXPECT_LE(accuracy(kelm_predict(model, X).labels, y), 0.5);
}

TEST(Train, Preconditions) {
    EXPECT_THROW(kelm_train(Matrix::Zero(1, 2), {"a"}, {}), InvalidLabelError);
    EXPECT_THROW(kelm_train(Matrix::Zero(3, 2), {"a", "a", "a"}, {}), InvalidLabelError);
    EXPECT_THROW(kelm_train(Matrix::Zero(3, 2), {"a", "b"}, {}), ShapeError);
    EXPECT_THROW(kelm_train(Matrix::Zero(3, 2), {"a", "b", "a"}, {1.0, -1.0, 1.0}), InvalidParameterError);
}

TEST(Train, ResidualBelowBoundAcrossParameters) {
    const Matrix X = random_matrix(40, 3, 6);
    std::vector<std::string> y;
    for (int i = 0; i < 40; ++i) y.push_back(X(i, 0) + X(i, 1) > 1.0 ? "hi" : "lo");
    for (double a : {0.01, 1.0, 100.0})
        for (double b : {0.01, 1.0, 100.0})
            for (double C : {0.01, 1.0, 1000.0}) {
                try {
                    EXPECT_LT(kelm_train(X, y, {a, b, C}).residual, 1e-6);
                } catch (const TrainingError&) {
                    // Reported failure is acceptable; a silent bad solve is not.
                }
            }
}

TEST(Train, AccuracyNonDecreasingInC) {
    const Matrix X = random_matrix(60, 2, 7);
    std::vector<std::string> y;
    for (int i = 0; i < 60; ++i) y.push_back(X(i, 0) < 0.5 ? "a" : "b");
    double prev = 0.0;
    for (double C : {0.1, 1.0, 10.0, 100.0}) {
        const auto m = kelm_train(X, y, {1.0, 0.5, C});
        const double acc = accuracy(kelm_predict(m, X).labels, y);
        EXPECT_GE(acc, prev) << "C=" << C;
        prev = acc;
    }
}

TEST(Predict, TwoClassScoresAntisymmetric) {
    const auto c = clusters(3);
    const auto model = kelm_train(c.X, c.y, {1.0, 1.0, 50.0});
    const auto pred = kelm_predict(model, random_matrix(15, 2, 8));
    EXPECT_LT((pred.scores.col(0) + pred.scores.col(1)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Predict, IsolatedTrainingPoint) {
    Matrix X(5, 2);
    X << 0, 0, 0.1, 0, 0, 0.1, 0.1, 0.1, 9, 9;
    const std::vector<std::string> y{"a", "a", "a", "a", "b"};
    const auto model = kelm_train(X, y, {1.0, 1.0, 100.0});
    EXPECT_EQ(kelm_predict(model, X.bottomRows(1)).labels.front(), "b");
}

TEST(Predict, ArgmaxInvariantUnderAffineMaps) {
    Matrix X = random_matrix(30, 3, 9);
    std::vector<std::string> y;
    for (int i = 0; i < 30; ++i) y.push_back(std::string(1, char('a' + i % 3)));
    const auto model = kelm_train(X, y, {1.0, 1.0, 10.0});
    const auto pred = kelm_predict(model, random_matrix(20, 3, 10));
    for (double s : {0.5, 3.0}) {
        const Matrix mapped = (s * pred.scores).array() + 2.0;
        for (Eigen::Index i = 0; i < mapped.rows(); ++i) {
            Eigen::Index best = 0;
            mapped.row(i).maxCoeff(&best);
            EXPECT_EQ(std::size_t(best), pred.class_index[std::size_t(i)]);
        }
    }
}

TEST(Predict, TiesGoToLowestClass) {
    // Both classes get identical scores for a point far outside the kernel's reach.
    Matrix X(2, 1);
    X << 0, 1;
    const auto model = kelm_train(X, {"b", "a"}, {1.0, 0.001, 1.0});
    Matrix far(1, 1);
    far << 1e6;
    const auto pred = kelm_predict(model, far);
    EXPECT_EQ(pred.scores(0, 0), pred.scores(0, 1));
    EXPECT_EQ(pred.labels.front(), "a");
}

TEST(Predict, ShapeCheck) {
    const auto c = clusters(4);
    const auto model = kelm_train(c.X, c.y, {});
    EXPECT_THROW(kelm_predict(model, Matrix::Zero(2, 3)), ShapeError);
}
