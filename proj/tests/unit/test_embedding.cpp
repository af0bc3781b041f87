#include "mdyn/embedding.hpp"
#include "mdyn/errors.hpp"
#include "mdyn/linear_gaussian.hpp"
#include "mdyn/random.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mdyn;

namespace {

DesignMatrices hand_dataset() {
    DesignMatrices dm;
    dm.Z.resize(3, 1);
    dm.G.resize(3, 1);
    dm.Z << -1, 0, 1;
    dm.G << -2, 0, 2;
    return dm;
}

ConditionalExpectationModel fit_pod_model(const DesignMatrices& dm, double lambda = 0.0) {
    const Basis b(fit_pod(dm.Z, ModeCount{static_cast<int>(dm.Z.cols())}));
    return fit_conditional_expectation(dm, b, lambda);
}

// (G^T Zc)(Zc^T Zc)^{-1}(z - zbar) + Gbar via a QR least-squares solve
Matrix ols_coefficients(const Matrix& Z, const Matrix& G, Vector& zbar, Vector& gbar) {
    zbar = Z.colwise().mean();
    gbar = G.colwise().mean();
    const Matrix Zc = Z.rowwise() - zbar.transpose();
    const Matrix Gc = G.rowwise() - gbar.transpose();
    return Zc.colPivHouseholderQr().solve(Gc).transpose();
}

DesignMatrices random_linear_problem(int M, int nz, int ng, std::uint64_t seed) {
    Rng rng = make_stream(seed);
    DesignMatrices dm;
    dm.Z = standard_normal(rng, M, nz) * standard_normal(rng, nz, nz);
    dm.G = dm.Z * standard_normal(rng, nz, ng) + standard_normal(rng, M, ng);
    dm.G.rowwise() += Vector::LinSpaced(ng, -1.0, 2.0).transpose();
    return dm;
}

// Golub-Welsch nodes/weights for N(0, 1).
void gauss_hermite(int n, Vector& nodes, Vector& weights) {
    Matrix J = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Matrix> es(J);
    nodes = es.eigenvalues();
    weights = es.eigenvectors().row(0).transpose().array().square();
}

}  // namespace

TEST(Expectation, HandDatasetPod) {
    const auto model = fit_pod_model(hand_dataset());
    EXPECT_NEAR(model.predict(Vector::Constant(1, 0.5))(0), 1.0, 1e-14);
    EXPECT_NEAR(model.predict(Vector::Constant(1, -3.0))(0), -6.0, 1e-13);
    EXPECT_NEAR(model.predict(Vector::Zero(1))(0), 0.0, 1e-14);
    // C_zz = I / M including the constant feature
    EXPECT_LT((model.c_zz() - Matrix::Identity(2, 2) / 3.0).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(model.residual_cov()(0, 0), 0.0, 1e-14);
}

TEST(Expectation, PredictAtMeanIsTargetMean) {
    const auto dm = random_linear_problem(60, 3, 2, 4);
    const auto model = fit_pod_model(dm);
    const Vector zbar = dm.Z.colwise().mean();
    const Vector gbar = dm.G.colwise().mean();
    EXPECT_LT((model.predict(zbar) - gbar).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Expectation, ZeroTarget) {
    auto dm = random_linear_problem(40, 2, 2, 5);
    dm.G.setZero();
    for (const Basis& b : {Basis(fit_pod(dm.Z, ModeCount{2})), Basis(fit_hermite(dm.Z, 2, 2))}) {
        const auto model = fit_conditional_expectation(dm, b, 1e-8);
        EXPECT_EQ(model.coefficients().cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(model.residual_cov().cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Expectation, PodEqualsOrdinaryLeastSquares) {
    Rng rng = make_stream(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const int nz = 1 + static_cast<int>(rng() % 8);
        const int M = nz + 2 + static_cast<int>(rng() % 200);
        const auto dm = random_linear_problem(M, nz, 2, 300 + trial);
        const auto model = fit_pod_model(dm);
        Vector zbar, gbar;
        const Matrix B = ols_coefficients(dm.Z, dm.G, zbar, gbar);
        for (int q = 0; q < 5; ++q) {
            const Vector z = standard_normal(rng, nz) * 2.0;
            const Vector oracle = B * (z - zbar) + gbar;
            EXPECT_LT((model.predict(z) - oracle).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
        }
    }
}

TEST(Expectation, ResidualCovarianceMatchesDirectComputation) {
    const auto dm = random_linear_problem(120, 3, 2, 6);
    const Basis b(fit_hermite(dm.Z, 2, 2));
    const auto model = fit_conditional_expectation(dm, b, 1e-8);
    Matrix res(dm.Z.rows(), 2);
    for (Eigen::Index i = 0; i < dm.Z.rows(); ++i) res.row(i) = dm.G.row(i) - model.predict(dm.Z.row(i).transpose()).transpose();
    const Matrix rc = res.rowwise() - res.colwise().mean();
    const Matrix cov = rc.transpose() * rc / static_cast<double>(dm.Z.rows());
    EXPECT_LT((model.residual_cov() - cov).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((model.residual_cov() - model.residual_cov().transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Expectation, BlockSizeDoesNotMatter) {
    const auto dm = random_linear_problem(200, 2, 1, 7);
    const Basis b(fit_hermite(dm.Z, 3, 3));
    const auto a = fit_conditional_expectation(dm, b, 1e-8, FitOptions{7});
    const auto c = fit_conditional_expectation(dm, b, 1e-8, FitOptions{4096});
    EXPECT_LT((a.coefficients() - c.coefficients()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((a.residual_cov() - c.residual_cov()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Expectation, LinearInTarget) {
    auto d1 = random_linear_problem(80, 2, 1, 8);
    auto d2 = d1;
    Rng rng = make_stream(9);
    d2.G = standard_normal(rng, 80, 1);
    auto d12 = d1;
    d12.G = d1.G + d2.G;
    const Basis b(fit_hermite(d1.Z, 3, 3));
    const auto m1 = fit_conditional_expectation(d1, b, 1e-6);
    const auto m2 = fit_conditional_expectation(d2, b, 1e-6);
    const auto m12 = fit_conditional_expectation(d12, b, 1e-6);
    const Vector z = Eigen::Vector2d(0.3, -1.1);
    EXPECT_NEAR(m12.predict(z)(0), m1.predict(z)(0) + m2.predict(z)(0), 1e-12);
}

// With C_zz = I / M the ridge shrinks every coefficient by the same factor.
TEST(Expectation, RidgeShrinkageIsExactForPod) {
    const auto dm = random_linear_problem(50, 3, 2, 10);
    const double M = 50;
    const Basis b(fit_pod(dm.Z, ModeCount{3}));
    const auto a1 = fit_conditional_expectation(dm, b, 1e-3);
    const auto a2 = fit_conditional_expectation(dm, b, 5e-2);
    const double expected = a1.coefficients().norm() * (1 / M + 1e-3) / (1 / M + 5e-2);
    EXPECT_NEAR(a2.coefficients().norm(), expected, 1e-12 * expected);
    EXPECT_LT(a2.coefficients().norm(), a1.coefficients().norm());
}

TEST(Expectation, SquarePodFeatureMatrixIsOrthogonal) {
    Rng rng = make_stream(11);
    const int M = 6;
    DesignMatrices dm;
    dm.Z = standard_normal(rng, M, 8);
    dm.G = standard_normal(rng, M, 1);
    const Basis b(fit_pod(dm.Z, ModeCount{M - 1}));
    ASSERT_EQ(b.size(), M);
    Matrix phi(M, M);
    b.features_rows(dm.Z, phi);
    EXPECT_LT((phi * phi.transpose() - Matrix::Identity(M, M)).cwiseAbs().maxCoeff(), 1e-10);
    // interpolation: the fit reproduces every training target
    const auto model = fit_conditional_expectation(dm, b, 0.0);
    for (int i = 0; i < M; ++i) EXPECT_NEAR(model.predict(dm.Z.row(i).transpose())(0), dm.G(i, 0), 1e-9);
}

TEST(Expectation, HermiteRecoversGaussianSlope) {
    const int N = 100000;
    const double rho = 0.6;
    Rng rng = make_stream(12);
    const Matrix e = standard_normal(rng, N, 2);
    DesignMatrices dm;
    dm.Z = e.col(0);
    dm.G = rho * e.col(0) + std::sqrt(1 - rho * rho) * e.col(1);
    const Basis b(fit_hermite(dm.Z, 3, 3));
    const auto model = fit_conditional_expectation(dm, b, 1e-8);
    const double slope = model.coefficients()(0, 1) * b.hermite().whitening()(0, 0);
    EXPECT_LT(std::abs(slope - rho), 3.0 * std::sqrt((1 - rho * rho) / N));
}

TEST(Expectation, IllConditionedGramIsRefused) {
    DesignMatrices dm;
    dm.Z.resize(20, 1);
    for (int i = 0; i < 20; ++i) dm.Z(i, 0) = i % 2;
    dm.G = dm.Z;
    const Basis b(fit_hermite(dm.Z, 3, 3));
    EXPECT_THROW(fit_conditional_expectation(dm, b, 0.0), ConditioningError);
    EXPECT_NO_THROW(fit_conditional_expectation(dm, b, 1e-3));
    EXPECT_THROW(fit_conditional_expectation(dm, b, -1.0), InvalidArgument);
}

TEST(Expectation, DimensionChecks) {
    const auto dm = random_linear_problem(30, 2, 1, 13);
    const Basis b(fit_pod(Matrix(dm.Z.leftCols(1)), ModeCount{1}));
    EXPECT_THROW(fit_conditional_expectation(dm, b, 0.0), DimensionError);
    const auto model = fit_pod_model(dm);
    EXPECT_THROW((void)model.predict(Vector::Zero(3)), DimensionError);
    EXPECT_THROW((void)model.predict(Vector::Constant(2, std::nan(""))), NonFiniteError);
}

// Equilibrium covariance is I for the reference parameters at eps = 1, so E[y | x] = 0.
TEST(Expectation, MarkovianLinearGaussianSlopeIsZero) {
    LinearGaussianParams p;
    Rng rng = make_stream(14);
    const auto run = simulate_linear_gaussian(p, 2000.0, 0.01, rng);
    const auto dm = build_delay_states(run.data, DelayConfig{0, 0});
    const auto model = fit_pod_model(dm);
    const double slope = model.predict(Vector::Ones(1))(0) - model.predict(Vector::Zero(1))(0);
    // about 2000 decorrelation times, so the slope standard error is near 0.03
    EXPECT_LT(std::abs(slope), 0.1);
}

TEST(Expectation, SaveLoadRoundTrip) {
    mdyn::testing::TempDir dir("model");
    const auto dm = random_linear_problem(60, 2, 2, 15);
    const auto pod = fit_pod_model(dm);
    const auto her = fit_conditional_expectation(dm, Basis(fit_hermite(dm.Z, 3, 3)), 1e-8);
    pod.save(dir.path(), "pod_");
    her.save(dir.path(), "her_");
    const auto pod2 = ConditionalExpectationModel::load(dir.path(), "pod_");
    const auto her2 = ConditionalExpectationModel::load(dir.path(), "her_");
    for (int i = 0; i < 10; ++i) {
        const Vector z = dm.Z.row(i).transpose();
        EXPECT_EQ(pod.predict(z), pod2.predict(z));
        EXPECT_EQ(her.predict(z), her2.predict(z));
    }
    EXPECT_EQ(her2.lambda(), 1e-8);
    EXPECT_EQ(her2.residual_cov(), her.residual_cov());
    EXPECT_THROW(ConditionalExpectationModel::load(dir.path(), "none_"), IoError);
}

TEST(SampleWeights, IdentityDriftReproducesPredict) {
    const auto dm = random_linear_problem(150, 2, 1, 16);
    for (const Basis& b : {Basis(fit_pod(dm.Z, ModeCount{2})), Basis(fit_hermite(dm.Z, 3, 3))}) {
        const auto model = fit_conditional_expectation(dm, b, 1e-8);
        const SampleWeightedEstimator est(model, dm.Z);
        const DriftSampler a = [](const Vector&, const Eigen::Ref<const Vector>& y) { return Vector(y); };
        const Vector z = Eigen::Vector2d(0.4, -0.2);
        EXPECT_NEAR(predict_general_drift(est, a, Vector::Zero(1), z, dm.G)(0), model.predict(z)(0), 1e-12);
    }
}

TEST(SampleWeights, ConstantAndAffineDrifts) {
    const auto dm = hand_dataset();
    const auto model = fit_pod_model(dm);
    const SampleWeightedEstimator est(model, dm.Z);
    const DriftSampler c = [](const Vector&, const Eigen::Ref<const Vector>&) { return Vector::Constant(1, 3.5); };
    const DriftSampler xy = [](const Vector& x, const Eigen::Ref<const Vector>& y) { return Vector(x + y); };
    for (double z : {-0.7, 0.0, 0.5, 2.0}) {
        const Vector zz = Vector::Constant(1, z);
        EXPECT_NEAR(predict_general_drift(est, c, Vector::Zero(1), zz, dm.G)(0), 3.5, 1e-13);
        const Vector xh = Vector::Constant(1, 1.25);
        EXPECT_NEAR(predict_general_drift(est, xy, xh, zz, dm.G)(0), 1.25 + 2 * z, 1e-13);
    }
}

TEST(SecondMoment, ConstantDiffusion) {
    const auto dm = random_linear_problem(40, 1, 1, 17);
    const auto model = fit_conditional_expectation(dm, Basis(fit_hermite(dm.Z, 2, 2)), 1e-10);
    const SampleWeightedEstimator est(model, dm.Z);
    Matrix B(2, 2);
    B << 1.0, 0.5, -0.3, 2.0;
    const DiffusionSampler b = [&](const Vector&, const Eigen::Ref<const Vector>&) { return B; };
    const Matrix out = conditional_second_moment(est, b, Vector::Zero(2), Vector::Constant(1, 0.3), dm.G);
    EXPECT_LT((out - B * B.transpose()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ((out - out.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SecondMoment, HandDatasetRegressesSquares) {
    const auto dm = hand_dataset();
    const SampleWeightedEstimator est(fit_pod_model(dm), dm.Z);
    const DiffusionSampler b = [](const Vector&, const Eigen::Ref<const Vector>& y) { return Matrix(y); };
    // y^2 = (4, 0, 4) regressed on (1, z): intercept 8/3, slope 0
    for (double z : {-1.0, 0.25, 3.0}) {
        const Matrix out = conditional_second_moment(est, b, Vector::Zero(1), Vector::Constant(1, z), dm.G);
        EXPECT_NEAR(out(0, 0), 8.0 / 3.0, 1e-13);
    }
}

TEST(SecondMoment, NegativePartIsClipped) {
    // y^2 = (0, 0, 9) on z = (-1, 0, 1) regresses to 3 + 4.5 z, negative for z < -2/3
    DesignMatrices dm = hand_dataset();
    dm.G << 0, 0, 3;
    const SampleWeightedEstimator est(fit_pod_model(dm), dm.Z);
    const DiffusionSampler b = [](const Vector&, const Eigen::Ref<const Vector>& y) { return Matrix(y); };
    EXPECT_NEAR(conditional_second_moment(est, b, Vector::Zero(1), Vector::Constant(1, 0.5), dm.G)(0, 0), 5.25,
                1e-12);
    EXPECT_EQ(conditional_second_moment(est, b, Vector::Zero(1), Vector::Constant(1, -2.0), dm.G)(0, 0), 0.0);
}

TEST(Density, IndependentStandardNormal) {
    const int N = 100000;
    Rng rng = make_stream(18);
    DesignMatrices dm;
    dm.Z = standard_normal(rng, N, 1);
    dm.G = standard_normal(rng, N, 1);
    const Basis zb(fit_hermite(dm.Z, 2, 2));
    const auto model = fit_conditional_density(dm, 4, zb, 1e-8);
    double worst = 0.0;
    for (double z : {-1.0, 0.0, 1.5}) {
        for (double y = -3.0; y <= 3.0; y += 0.05) {
            const double truth = std::exp(-0.5 * y * y) / std::sqrt(2 * std::numbers::pi);
            worst = std::max(worst, std::abs(density_evaluate(model, Vector::Constant(1, y), Vector::Constant(1, z)) - truth));
        }
    }
    EXPECT_LT(worst, 10.0 / std::sqrt(static_cast<double>(N)));
}

// Both routes contract the same C_yz C_zz^{-1}: the mean of the series density is the regression.
TEST(Density, FirstMomentMatchesExpectationModel) {
    const int N = 5000;
    Rng rng = make_stream(19);
    DesignMatrices dm;
    dm.Z = standard_normal(rng, N, 1);
    dm.G = 0.8 * dm.Z.array().square() - 0.4 + 0.5 * standard_normal(rng, N, 1).array();
    const Basis zb(fit_hermite(dm.Z, 3, 3));
    const auto dens = fit_conditional_density(dm, 5, zb, 1e-8);
    const auto expect = fit_conditional_expectation(dm, zb, 1e-8);
    Vector nodes, weights;
    gauss_hermite(20, nodes, weights);
    const double mu = dens.y_basis().mean()(0);
    const double s = 1.0 / dens.y_basis().whitening()(0, 0);
    for (int i = 0; i < 10; ++i) {
        const Vector z = dm.Z.row(i * 37).transpose();
        double mass = 0.0;
        double first = 0.0;
        for (Eigen::Index q = 0; q < nodes.size(); ++q) {
            const double y = mu + s * nodes(q);
            // p(y) / q(y) integrated against the normal weight
            const double ratio = density_evaluate(dens, Vector::Constant(1, y), z) / dens.weight(Vector::Constant(1, y));
            mass += weights(q) * ratio;
            first += weights(q) * ratio * y;
        }
        EXPECT_NEAR(mass, 1.0, 0.05);
        EXPECT_NEAR(first, expect.predict(z)(0), 1e-6);
    }
}

TEST(Density, RefusesTooManyFunctions) {
    DesignMatrices dm;
    dm.Z = Matrix::Random(5, 1);
    dm.G = Matrix::Random(5, 1);
    const Basis zb(fit_pod(dm.Z, ModeCount{1}));
    EXPECT_THROW(fit_conditional_density(dm, 6, zb, 0.0), InvalidArgument);
}
