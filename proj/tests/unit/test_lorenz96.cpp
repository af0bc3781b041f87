#include "mdyn/errors.hpp"
#include "mdyn/lorenz96.hpp"

#include <Eigen/QR>
#include <gtest/gtest.h>

#include <cmath>

using namespace mdyn;

namespace {

L96Params small_params() {
    L96Params p;
    p.K = 6;
    p.J = 4;
    p.eps = 0.5;
    return p;
}

}  // namespace

TEST(L96, HomogeneousFixedPointWhenDecoupled) {
    L96Params p = small_params();
    p.hx = 0.0;
    Rng rng = make_stream(1);
    L96State s = l96_initial_condition(p, rng);
    s.X.setConstant(p.F);
    const auto run = simulate_l96(p, 1.0, 0.01, 0.001, s);
    EXPECT_LT((run.data.x().array() - p.F).abs().maxCoeff(), 1e-12);
}

TEST(L96, ResolvedDriftWrapsIndices) {
    L96Params p = small_params();
    Vector X(6);
    X << 1.0, -2.0, 3.5, 0.25, -1.5, 2.0;
    Vector B(6);
    B << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    const Vector d = l96_resolved_drift(p, X, B);
    EXPECT_DOUBLE_EQ(d(0), X(5) * (X(1) - X(4)) - X(0) + p.F + B(0));
    EXPECT_DOUBLE_EQ(d(1), X(0) * (X(2) - X(5)) - X(1) + p.F + B(1));
    EXPECT_DOUBLE_EQ(d(5), X(4) * (X(0) - X(3)) - X(5) + p.F + B(5));
    EXPECT_DOUBLE_EQ(d(3), X(2) * (X(4) - X(1)) - X(3) + p.F + B(3));
}

TEST(L96, FastVariablesWrapAcrossSectors) {
    L96Params p = small_params();
    Rng rng = make_stream(2);
    L96State s{standard_normal(rng, p.K), standard_normal(rng, p.K * p.J)};
    L96State ds;
    l96_rhs(p, s, ds);
    const Vector& Y = s.Y;
    const int n = p.K * p.J;
    // last fast variable of sector 0 reaches into sector 1
    const int g = p.J - 1;
    EXPECT_DOUBLE_EQ(ds.Y(g), (Y(g + 1) * (Y(g - 1) - Y(g + 2)) - Y(g) + p.hy * s.X(0)) / p.eps);
    // the global end wraps to the start
    EXPECT_DOUBLE_EQ(ds.Y(n - 1), (Y(0) * (Y(n - 2) - Y(1)) - Y(n - 1) + p.hy * s.X(p.K - 1)) / p.eps);
    EXPECT_DOUBLE_EQ(ds.Y(0), (Y(1) * (Y(n - 1) - Y(2)) - Y(0) + p.hy * s.X(0)) / p.eps);
}

TEST(L96, CouplingRecomputedFromFinalState) {
    const L96Params p = small_params();
    Rng rng = make_stream(3);
    const auto run = simulate_l96(p, 2.0, 0.01, 0.001, l96_initial_condition(p, rng), 1.0);
    const Vector B = l96_coupling(p, run.final_state.Y);
    EXPECT_LT((B.transpose() - run.data.y().bottomRows(1)).cwiseAbs().maxCoeff(), 1e-14);
    for (int k = 0; k < p.K; ++k) {
        EXPECT_NEAR(B(k), p.hx / p.J * run.final_state.Y.segment(k * p.J, p.J).sum(), 1e-14);
    }
    EXPECT_EQ(run.data.size(), 200u);
    EXPECT_EQ(run.final_state.X.transpose(), run.data.x().bottomRows(1));
}

TEST(L96, Rk4IsFourthOrder) {
    const L96Params p = small_params();
    Rng rng = make_stream(4);
    L96State s0 = l96_initial_condition(p, rng);
    s0.X *= 3.0;
    s0.Y *= 10.0;
    const double T = 0.2;
    auto integrate = [&](double dt) {
        L96State s = s0;
        const int n = static_cast<int>(std::lround(T / dt));
        for (int i = 0; i < n; ++i) l96_rk4_step(p, s, dt);
        return s;
    };
    const L96State ref = integrate(1e-4);
    const auto err = [&](double dt) {
        const L96State s = integrate(dt);
        return std::max((s.X - ref.X).cwiseAbs().maxCoeff(), (s.Y - ref.Y).cwiseAbs().maxCoeff());
    };
    const double e1 = err(0.02);
    const double e2 = err(0.01);
    EXPECT_NEAR(e1 / e2, 16.0, 3.0);
}

TEST(L96, InitialConditionScales) {
    L96Params p;
    Rng rng = make_stream(5);
    const L96State s = l96_initial_condition(p, rng);
    ASSERT_EQ(s.X.size(), 18);
    ASSERT_EQ(s.Y.size(), 360);
    const double sdY = std::sqrt(s.Y.squaredNorm() / 360.0);
    EXPECT_NEAR(sdY, 0.1, 0.02);
}

TEST(L96, Validation) {
    L96Params p;
    p.K = 3;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p = {};
    p.J = 0;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p = {};
    p.eps = 0.0;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p = small_params();
    Rng rng = make_stream(6);
    L96State s = l96_initial_condition(p, rng);
    EXPECT_THROW(simulate_l96(p, 1.0, 0.015, 0.01, s), InvalidArgument);
    s.Y.resize(3);
    EXPECT_THROW(simulate_l96(p, 1.0, 0.01, 0.001, s), DimensionError);
}

TEST(Wilks, RecoversExactQuintic) {
    const std::array<double, 6> b{0.5, -1.2, 0.03, 0.004, -2e-4, 3e-6};
    const Vector X = Vector::LinSpaced(200, -8.0, 12.0);
    Vector B(200);
    for (int i = 0; i < 200; ++i) B(i) = wilks_evaluate(b, X(i));
    const auto fit = wilks_fit(X, B);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(fit[j], b[j], 1e-8 * std::max(1.0, std::abs(b[j])));
    EXPECT_DOUBLE_EQ(wilks_evaluate(b, 2.0), 0.5 - 2.4 + 0.12 + 0.032 - 0.0032 + 0.000096);
}

TEST(Wilks, ConstantTarget) {
    const Vector X = Vector::LinSpaced(50, -5.0, 9.0);
    const auto fit = wilks_fit(X, Vector::Constant(50, -0.7));
    EXPECT_NEAR(fit[0], -0.7, 1e-10);
    for (int j = 1; j < 6; ++j) EXPECT_NEAR(fit[j], 0.0, 1e-10);
}

TEST(Wilks, ResidualNotAboveLinearFit) {
    Rng rng = make_stream(7);
    const Vector X = standard_normal(rng, 300) * 3.0;
    const Vector B = (X.array().sin() + 0.3 * X.array()).matrix() + 0.2 * standard_normal(rng, 300);
    const auto fit = wilks_fit(X, B);
    double quintic = 0.0;
    for (int i = 0; i < 300; ++i) quintic += std::pow(B(i) - wilks_evaluate(fit, X(i)), 2);
    Matrix V(300, 2);
    V << Vector::Ones(300), X;
    const Vector c = V.colPivHouseholderQr().solve(B);
    const double linear = (B - V * c).squaredNorm();
    EXPECT_LE(quintic, linear);
}

TEST(Wilks, NeedsSixDistinctValues) {
    Vector X(10);
    X << 1, 2, 3, 4, 5, 1, 2, 3, 4, 5;
    EXPECT_THROW(wilks_fit(X, X), RankError);
    EXPECT_THROW(wilks_fit(X, Vector::Zero(3)), DimensionError);
}

TEST(Wilks, PredictorAppliesPerSector) {
    const std::array<double, 6> b{1.0, 2.0, 0.0, 0.0, 0.0, 0.0};
    const auto pred = wilks_predictor(b, 3);
    const ClosureState s((Matrix(1, 3) << 0.0, 1.0, -2.0).finished(), Matrix(0, 3));
    EXPECT_EQ(pred->predict(s), Eigen::Vector3d(1.0, 3.0, -3.0));
}
