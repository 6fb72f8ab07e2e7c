#include "gaitid/projection.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gaitid;

namespace {

Matrix random_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(n, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

oracle::Table to_table(const Matrix& m) {
    oracle::Table t(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) t[std::size_t(i)][std::size_t(j)] = m(i, j);
    return t;
}

/// Rows of an m-dimensional cloud placed in d dimensions by a random orthonormal map.
Matrix embedded(Eigen::Index n, Eigen::Index m, Eigen::Index d, std::uint64_t seed) {
    const Matrix low = random_matrix(n, m, seed);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(random_matrix(d, d, seed + 1, -1, 1)));
    const Eigen::MatrixXd Q = qr.householderQ();
    return low * Q.leftCols(m).transpose();
}

}  // namespace

TEST(Distances, Basics) {
    Matrix X(3, 2);
    X << 0, 0, 3, 4, 0, 0;
    const Matrix D = pairwise_distances(X);
    EXPECT_EQ(D(0, 1), 5.0);
    EXPECT_EQ(D(0, 2), 0.0);
    EXPECT_EQ(D, D.transpose());
    EXPECT_THROW(pairwise_distances(Matrix(1, 2)), ShapeError);
}

TEST(Distances, MatchOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix X = random_matrix(5 + Eigen::Index(seed % 4), 3, seed, -2, 2);
        const Matrix D = pairwise_distances(X);
        const auto want = oracle::distances(to_table(X));
        for (Eigen::Index i = 0; i < D.rows(); ++i)
            for (Eigen::Index j = 0; j < D.cols(); ++j) EXPECT_NEAR(D(i, j), want[std::size_t(i)][std::size_t(j)], 1e-12);
    }
}

TEST(Stress, ZeroForPerfectEmbedding) {
    const Matrix D = pairwise_distances(random_matrix(12, 4, 1));
    EXPECT_EQ(sammon_stress(D, D), 0.0);
}

TEST(Stress, ThreePointHandValue) {
    Matrix Dh(3, 3), Dl(3, 3);
    Dh << 0, 1, 1, 1, 0, 1, 1, 1, 0;
    Dl << 0, 1, 1, 1, 0, 2, 1, 2, 0;
    EXPECT_NEAR(sammon_stress(Dh, Dl), 1.0 / 3.0, 1e-15);
}

TEST(Stress, UniqueZeroUnderScaling) {
    const Matrix D = pairwise_distances(random_matrix(8, 3, 2));
    for (double s : {0.5, 0.99, 1.01, 2.0}) EXPECT_GT(sammon_stress(D, s * D), 0.0);
}

TEST(Stress, RotationInvariant) {
    const Matrix X = random_matrix(10, 5, 3);
    const Matrix Y = random_matrix(10, 2, 4);
    const double t = 0.7;
    Matrix R(2, 2);
    R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    const Matrix D = pairwise_distances(X);
    EXPECT_NEAR(sammon_stress(D, pairwise_distances(Y)), sammon_stress(D, pairwise_distances(Y * R)), 1e-14);
}

TEST(Stress, GuardCountsCoincidentPairs) {
    Matrix X(3, 2);
    X << 0, 0, 0, 0, 1, 1;
    const auto r = sammon_stress_checked(pairwise_distances(X), pairwise_distances(X));
    EXPECT_EQ(r.guarded_pairs, 1u);
    EXPECT_TRUE(std::isfinite(r.stress));
}

TEST(Derivatives, MatchFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix D = pairwise_distances(random_matrix(10, 6, 10 + seed));
        Matrix Y = random_matrix(10, 2, 20 + seed);
        const auto der = sammon_derivatives(D, Y);
        const double h = 1e-5;
        double max_err = 0.0, max_g = 0.0, max_herr = 0.0, max_h = 0.0;
        for (Eigen::Index p = 0; p < Y.rows(); ++p)
            for (Eigen::Index k = 0; k < Y.cols(); ++k) {
                Matrix Yp = Y, Ym = Y;
                Yp(p, k) += h;
                Ym(p, k) -= h;
                const double ep = sammon_stress(D, pairwise_distances(Yp));
                const double em = sammon_stress(D, pairwise_distances(Ym));
                const double e0 = sammon_stress(D, pairwise_distances(Y));
                max_err = std::max(max_err, std::abs((ep - em) / (2 * h) - der.gradient(p, k)));
                max_g = std::max(max_g, std::abs(der.gradient(p, k)));
                const double h2 = (ep - 2 * e0 + em) / (h * h);
                max_herr = std::max(max_herr, std::abs(h2 - der.hessian_diag(p, k)));
                max_h = std::max(max_h, std::abs(der.hessian_diag(p, k)));
            }
        EXPECT_LT(max_err / max_g, 1e-5) << "seed " << seed;
        EXPECT_LT(max_herr / max_h, 1e-3) << "seed " << seed;
    }
}

TEST(Pca, LineHasFullExplainedVariance) {
    Matrix X(10, 3);
    for (int i = 0; i < 10; ++i) X.row(i) << i, 2.0 * i + 1.0, -0.5 * i;
    EXPECT_NEAR(pca_fit(X, 1).explained_variance_ratio(), 1.0, 1e-10);
}

TEST(Pca, MatchesJacobiOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix X = random_matrix(20, 6, 40 + seed);
        const auto model = pca_fit(X, 4);
        const auto [vals, vecs] = oracle::jacobi_eigen(oracle::covariance(to_table(X)));
        for (Eigen::Index c = 0; c < 4; ++c) {
            EXPECT_NEAR(model.eigenvalues(c), vals[std::size_t(c)], 1e-8);
            double dot = 0.0;
            for (Eigen::Index r = 0; r < 6; ++r) dot += model.components(r, c) * vecs[std::size_t(r)][std::size_t(c)];
            const double sign = dot < 0 ? -1.0 : 1.0;
            for (Eigen::Index r = 0; r < 6; ++r)
                EXPECT_NEAR(model.components(r, c), sign * vecs[std::size_t(r)][std::size_t(c)], 1e-8);
        }
    }
}

TEST(Pca, OrthonormalDescendingAndCentered) {
    const Matrix X = random_matrix(30, 8, 5);
    const auto model = pca_fit(X, 5);
    EXPECT_LT((model.components.transpose() * model.components - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
    for (Eigen::Index i = 1; i < 5; ++i) EXPECT_GE(model.eigenvalues(i - 1), model.eigenvalues(i));
    const Matrix mean_row = model.mean.transpose();
    EXPECT_LT(pca_transform(model, mean_row).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Pca, ReconstructionErrorNonIncreasing) {
    const Matrix X = random_matrix(25, 7, 6);
    double prev = INFINITY;
    for (Eigen::Index k = 1; k <= 7; ++k) {
        const auto m = pca_fit(X, k);
        const double err = (pca_reconstruct(m, pca_transform(m, X)) - X).squaredNorm();
        EXPECT_LE(err, prev + 1e-12);
        prev = err;
    }
    EXPECT_LT(prev, 1e-20);
}

TEST(Pca, TooManyComponents) {
    EXPECT_THROW(pca_fit(random_matrix(5, 8, 7), 5), InvalidParameterError);
    EXPECT_THROW(pca_fit(random_matrix(5, 3, 7), 4), InvalidParameterError);
}

TEST(EspFit, EmbeddableDataReachesZeroStress) {
    EspOptions o;
    o.target_dim = 2;
    const auto model = esp_fit(embedded(40, 2, 6, 8), o);
    EXPECT_LT(model.stress_trace.back(), 1e-6);
}

TEST(EspFit, StressTraceNonIncreasing) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        EspOptions o;
        o.target_dim = 2 + Eigen::Index(seed % 3);
        o.max_iter = 60;
        const auto model = esp_fit(random_matrix(25, 6, 100 + seed), o);
        ASSERT_GE(model.stress_trace.size(), 1u);
        for (std::size_t i = 1; i < model.stress_trace.size(); ++i) {
            ASSERT_TRUE(std::isfinite(model.stress_trace[i]));
            ASSERT_LE(model.stress_trace[i], model.stress_trace[i - 1]) << "seed " << seed << " iter " << i;
        }
        EXPECT_EQ(model.anchors_low.rows(), model.anchors_high.rows());
    }
}

TEST(EspFit, BlobStressDrops) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z;
    Matrix X(50, 10);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = z(rng);
    EspOptions o;
    o.target_dim = 2;
    const auto model = esp_fit(X, o);
    EXPECT_LT(model.stress_trace.back(), model.stress_trace.front());
    EXPECT_GE(1.0 - model.stress_trace.back() / model.stress_trace.front(), 0.50);
}

TEST(EspFit, Preconditions) {
    EspOptions o;
    o.target_dim = 3;
    EXPECT_THROW(esp_fit(random_matrix(3, 5, 1), o), InvalidParameterError);
    EXPECT_THROW(esp_fit(random_matrix(10, 3, 1), o), InvalidParameterError);
    EXPECT_THROW(esp_fit(Matrix::Constant(10, 5, 0.3), o), DegenerateInputError);
    o.alpha = 0.0;
    EXPECT_THROW(esp_fit(random_matrix(10, 5, 1), o), InvalidParameterError);
}

TEST(EspFit, DuplicateRowsArePerturbed) {
    Matrix X = random_matrix(12, 4, 2);
    X.row(5) = X.row(2);
    EspOptions o;
    o.target_dim = 2;
    const auto model = esp_fit(X, o);
    EXPECT_EQ(model.perturbed_rows, 1u);
    for (double s : model.stress_trace) EXPECT_TRUE(std::isfinite(s));
}

TEST(EspFit, AnchorCap) {
    EspOptions o;
    o.target_dim = 2;
    o.max_anchors = 20;
    const Matrix X = random_matrix(60, 4, 3);
    const auto ft = esp_fit_transform(X, o);
    EXPECT_EQ(ft.model.anchors_high.rows(), 20);
    EXPECT_EQ(ft.embedding.rows(), 60);
    EXPECT_TRUE(ft.embedding.allFinite());
}

TEST(EspTransform, AnchorMapsToItself) {
    EspOptions o;
    o.target_dim = 2;
    const Matrix X = random_matrix(30, 5, 11);
    const auto model = esp_fit(X, o);
    const Matrix D = pairwise_distances(model.anchors_low);
    const double diameter = D.maxCoeff();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const RowVector y = esp_transform(model, RowVector(X.row(i)));
        EXPECT_LT((y - model.anchors_low.row(i)).norm(), 1e-3 * diameter);
    }
}

TEST(EspTransform, NearDuplicateOfAnchor) {
    EspOptions o;
    o.target_dim = 2;
    const Matrix X = embedded(30, 2, 5, 12);
    const auto model = esp_fit(X, o);
    RowVector x = X.row(4);
    x(0) += 1e-7;
    EXPECT_LT((esp_transform(model, x) - model.anchors_low.row(4)).norm(), 1e-3);
}

TEST(EspTransform, Deterministic) {
    EspOptions o;
    o.target_dim = 2;
    const auto model = esp_fit(random_matrix(25, 5, 13), o);
    const RowVector x = random_matrix(1, 5, 14);
    const RowVector a = esp_transform(model, x), b = esp_transform(model, x);
    EXPECT_EQ(a, b);
}

// In the zero-stress regime the out-of-sample map agrees with the PCA coordinates.
TEST(EspTransform, ZeroStressRegimeMatchesPca) {
    EspOptions o;
    o.target_dim = 2;
    const Matrix all = embedded(41, 2, 6, 15);
    const Matrix train = all.topRows(40);
    const auto model = esp_fit(train, o);
    const RowVector x = all.row(40);
    const RowVector got = esp_transform(model, x);
    const RowVector want = pca_transform(model.init, Matrix(x));
    EXPECT_LT((got - want).norm(), 1e-3);
}

// A point next to an anchor: the global minimum over a fine grid sits at that anchor's
// coordinate, and the transform finds it.
TEST(EspTransform, NearDuplicateMatchesGridSearch) {
    EspOptions o;
    o.target_dim = 1;
    const Matrix X = random_matrix(20, 3, 16);
    const auto model = esp_fit(X, o);
    for (Eigen::Index a : {0, 7, 13}) {
        RowVector x = X.row(a);
        x(1) += 1e-8;
        double best = INFINITY, arg = 0.0;
        RowVector g(1);
        for (double v = -3.0; v <= 3.0; v += 1e-4) {
            g(0) = v;
            const double e = esp_point_stress(model, x, g);
            if (e < best) {
                best = e;
                arg = v;
            }
        }
        EXPECT_NEAR(arg, model.anchors_low(a, 0), 1e-3);
        EXPECT_NEAR(esp_transform(model, x)(0), model.anchors_low(a, 0), 1e-3);
    }
}

// General points land on a local minimum of their stress: no better value nearby.
TEST(EspTransform, LocallyOptimal) {
    EspOptions o;
    o.target_dim = 2;
    const Matrix X = random_matrix(25, 4, 18);
    const auto model = esp_fit(X, o);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const RowVector x = random_matrix(1, 4, 300 + s);
        const RowVector y = esp_transform(model, x);
        const double e = esp_point_stress(model, x, y);
        for (double dx = -0.02; dx <= 0.02; dx += 0.002)
            for (double dy = -0.02; dy <= 0.02; dy += 0.002) {
                RowVector z = y;
                z(0) += dx;
                z(1) += dy;
                EXPECT_GE(esp_point_stress(model, x, z), e - 1e-6 * e);
            }
    }
}

TEST(EspTransform, ShapeCheck) {
    EspOptions o;
    o.target_dim = 2;
    const auto model = esp_fit(random_matrix(10, 4, 17), o);
    EXPECT_THROW(esp_transform(model, RowVector(RowVector::Zero(3))), ShapeError);
}
