#include "mdyn/errors.hpp"
#include "mdyn/stats.hpp"
#include "test_util.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

using namespace mdyn;

TEST(Acf, HandSeries) {
    Vector s(4);
    s << 1.0, 2.0, 3.0, 4.0;
    // centred: -1.5, -0.5, 0.5, 1.5
    const auto r = acf(s, 2, false, 0.5);
    EXPECT_DOUBLE_EQ(r.values(0), 5.0 / 4.0);
    EXPECT_DOUBLE_EQ(r.values(1), (0.75 - 0.25 + 0.75) / 3.0);
    EXPECT_DOUBLE_EQ(r.values(2), (-0.75 - 0.75) / 2.0);
    EXPECT_DOUBLE_EQ(r.abscissa(2), 1.0);
    const auto n = acf(s, 2, true);
    EXPECT_EQ(n.values(0), 1.0);
    EXPECT_DOUBLE_EQ(n.values(2), -0.75 / 1.25);
}

TEST(Acf, WhiteNoiseWithinThreeOverRootN) {
    Rng rng = make_stream(1);
    const int N = 20000;
    const Vector s = standard_normal(rng, N);
    const auto r = acf(s, 20, true);
    for (int l = 1; l <= 20; ++l) EXPECT_LT(std::abs(r.values(l)), 3.0 / std::sqrt(N)) << l;
}

TEST(Acf, Ar1MatchesGeometricDecay) {
    Rng rng = make_stream(2);
    const double phi = 0.8;
    const int N = 200000;
    const Vector e = standard_normal(rng, N);
    Vector s(N);
    s(0) = e(0);
    for (int i = 1; i < N; ++i) s(i) = phi * s(i - 1) + std::sqrt(1 - phi * phi) * e(i);
    const auto r = acf(s, 10, true);
    for (int l = 0; l <= 10; ++l) EXPECT_NEAR(r.values(l), std::pow(phi, l), 0.02) << l;
}

TEST(Acf, ColumnsAverageAndErrors) {
    Rng rng = make_stream(3);
    Matrix X = standard_normal(rng, 3000, 4);
    const auto r = acf_columns(X, 5);
    Vector mean = Vector::Zero(6);
    for (int k = 0; k < 4; ++k) mean += acf(X.col(k), 5, true).values / 4.0;
    EXPECT_LT((r.values - mean).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(r.stderr_values.size(), 6);
    EXPECT_EQ(r.stderr_values(0), 0.0);
    EXPECT_THROW(acf(Vector::Ones(5), 2, true), InvalidArgument);
    EXPECT_THROW(acf(Vector::Ones(2), 2, false), LengthError);
    Vector bad = Vector::Zero(5);
    bad(2) = std::nan("");
    EXPECT_THROW(acf(bad, 1, false), NonFiniteError);
}

TEST(Ccf, SelfCorrelationIsAcf) {
    Rng rng = make_stream(4);
    const Vector a = standard_normal(rng, 500);
    EXPECT_LT((ccf(a, a, 7).values - acf(a, 7, true).values).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Ccf, LeadsPositiveLag) {
    // b leads a by three steps
    Rng rng = make_stream(5);
    const Vector b = standard_normal(rng, 5000);
    Vector a = Vector::Zero(5000);
    a.tail(4997) = b.head(4997);
    const auto r = ccf(a, b, 5);
    int best = 0;
    r.values.cwiseAbs().maxCoeff(&best);
    EXPECT_EQ(best, 3);
    EXPECT_THROW(ccf(a, b.head(10), 2), DimensionError);
}

TEST(Pdf, HistogramIntegratesToOne) {
    Rng rng = make_stream(6);
    const Vector s = standard_normal(rng, 10000);
    const auto p = pdf_estimate(s, 37);
    EXPECT_NEAR(p.histogram.values.sum() * p.bin_width, 1.0, 1e-12);
    EXPECT_NEAR(p.kde.values.sum() * p.bin_width, 1.0, 0.02);
    EXPECT_DOUBLE_EQ(p.bandwidth, silverman_bandwidth(s));
}

TEST(Pdf, NormalSampleCloseToDensity) {
    Rng rng = make_stream(7);
    const Vector s = standard_normal(rng, 100000);
    const auto p = pdf_estimate(s, 50, -4.0, 4.0);
    const boost::math::normal_distribution<double> nd;
    double l1 = 0.0, l1_kde = 0.0;
    for (int b = 0; b < 50; ++b) {
        const double c = p.histogram.abscissa(b);
        const double w = p.bin_width;
        const double mass = boost::math::cdf(nd, c + w / 2) - boost::math::cdf(nd, c - w / 2);
        l1 += std::abs(p.histogram.values(b) * w - mass);
        l1_kde += std::abs(p.kde.values(b) - boost::math::pdf(nd, c)) * w;
    }
    EXPECT_LT(l1, 0.05);
    EXPECT_LT(l1_kde, 0.05);
}

TEST(Pdf, SilvermanHandValue) {
    Vector s(5);
    s << 1.0, 2.0, 3.0, 4.0, 5.0;
    // sd = sqrt(2.5) = 1.581, IQR / 1.34 = 2 / 1.34 = 1.493
    EXPECT_NEAR(silverman_bandwidth(s), 0.9 * 2.0 / 1.34 * std::pow(5.0, -0.2), 1e-14);
}

TEST(Pdf, L1DistanceBounds) {
    Rng rng = make_stream(8);
    const Vector a = standard_normal(rng, 5000);
    EXPECT_EQ(histogram_l1_distance(a, a, 30, -4, 4), 0.0);
    const Vector far = Vector::Constant(100, 10.0);
    EXPECT_NEAR(histogram_l1_distance(a.cwiseMin(4.0).cwiseMax(-4.0), (far.array() - 5.0).matrix(), 30, -5, 6), 2.0,
                1e-12);
}

TEST(WaveStatistics, ConstantField) {
    Matrix X = Matrix::Constant(10, 8, -2.0);
    const auto ws = wave_statistics(X);
    ASSERT_EQ(ws.wavenumber.size(), 5);
    EXPECT_NEAR(ws.mean_amplitude(0), 16.0, 1e-12);
    EXPECT_LT(ws.mean_amplitude.tail(4).maxCoeff(), 1e-12);
    EXPECT_LT(ws.variance.maxCoeff(), 1e-20);
}

TEST(WaveStatistics, CosineAtWavenumberTwo) {
    const int K = 12;
    Matrix X(20, K);
    for (int t = 0; t < 20; ++t)
        for (int k = 0; k < K; ++k) X(t, k) = std::cos(2.0 * std::numbers::pi * 2.0 * k / K + 0.3 * t);
    const auto ws = wave_statistics(X);
    EXPECT_NEAR(ws.mean_amplitude(2), K / 2.0, 1e-10);
    for (int m : {0, 1, 3, 4, 5, 6}) EXPECT_LT(ws.mean_amplitude(m), 1e-10) << m;
}

TEST(WaveStatistics, Parseval) {
    Rng rng = make_stream(9);
    const Vector row = standard_normal(rng, 18);
    const Eigen::VectorXcd u = spatial_dft(row);
    EXPECT_NEAR(u.squaredNorm() / 18.0, row.squaredNorm(), 1e-10);
    EXPECT_NEAR(u(0).real(), row.sum(), 1e-12);
}

TEST(Skill, PerfectForecast) {
    Rng rng = make_stream(10);
    const Matrix t = standard_normal(rng, 6, 3);
    const auto s = rmse_ancr({t}, {{t, t}}, Vector::Zero(3), 0.1);
    EXPECT_EQ(s.rmse.values, Vector::Zero(6));
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(s.ancr.values(i), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(s.rmse.abscissa(5), 0.5);
}

TEST(Skill, HandPooledValues) {
    Matrix t(1, 2), f1(1, 2), f2(1, 2);
    t << 1.0, -1.0;
    f1 << 2.0, -1.0;
    f2 << -1.0, 1.0;
    const auto s = rmse_ancr({t}, {{f1, f2}}, Vector::Zero(2), 1.0);
    // squared errors 1 + 0 + 4 + 4 over 4 entries
    EXPECT_DOUBLE_EQ(s.rmse.values(0), std::sqrt(9.0 / 4.0));
    // num = 3 - 2, vf = 5 + 2, vt = 2 + 2
    EXPECT_DOUBLE_EQ(s.ancr.values(0), 1.0 / std::sqrt(7.0 * 4.0));
    const auto z = rmse_ancr({t}, {{f1}}, Vector(t.row(0).transpose()), 1.0);
    EXPECT_EQ(z.ancr.values(0), 0.0);
    EXPECT_THROW(rmse_ancr({t}, {{f1}}, Vector::Zero(3), 1.0), DimensionError);
}

TEST(RankHistogram, TruthRankAndTies) {
    Rng rng = make_stream(11);
    EXPECT_EQ(truth_rank(0.5, {0.1, 0.2, 0.9}, rng), 2);
    EXPECT_EQ(truth_rank(-1.0, {0.1, 0.2, 0.9}, rng), 0);
    EXPECT_EQ(truth_rank(2.0, {0.1, 0.2, 0.9}, rng), 3);
    std::vector<int> seen(4, 0);
    for (int i = 0; i < 400; ++i) ++seen[truth_rank(0.2, {0.2, 0.2, 0.2}, rng)];
    for (int c : seen) EXPECT_GT(c, 50);
}

TEST(RankHistogram, ExchangeableIsFlatAndBiasedIsNot) {
    Rng rng = make_stream(12);
    const int cases = 300, members = 9;
    std::vector<Matrix> truth, shifted_truth;
    std::vector<std::vector<Matrix>> ens;
    for (int c = 0; c < cases; ++c) {
        truth.push_back(standard_normal(rng, 3, 4));
        shifted_truth.push_back(truth.back().array() + 1.5);
        std::vector<Matrix> e;
        for (int m = 0; m < members; ++m) e.push_back(standard_normal(rng, 3, 4));
        ens.push_back(std::move(e));
    }
    const auto flat = rank_histogram(truth, ens, {0, 2}, rng);
    ASSERT_EQ(flat.size(), 10u);
    EXPECT_EQ(std::accumulate(flat.begin(), flat.end(), 0L), cases * 2 * 4);
    EXPECT_GT(chi_square_flatness(flat).p_value, 1e-3);

    const auto biased = rank_histogram(shifted_truth, ens, {0, 2}, rng);
    EXPECT_GT(biased.back(), biased.front());
    EXPECT_LT(chi_square_flatness(biased).p_value, 1e-6);
    EXPECT_THROW(rank_histogram(truth, ens, {3}, rng), LengthError);
}

TEST(ChiSquare, MatchesBoostDirectly) {
    const std::vector<long> counts{10, 20, 30, 40};
    const auto r = chi_square_flatness(counts);
    // expected 25 each
    EXPECT_DOUBLE_EQ(r.statistic, (225.0 + 25.0 + 25.0 + 225.0) / 25.0);
    EXPECT_EQ(r.dof, 3);
    const boost::math::chi_squared_distribution<double> d(3);
    EXPECT_NEAR(r.p_value, 1.0 - boost::math::cdf(d, 20.0), 1e-12);
    const auto flat = chi_square_flatness({5, 5, 5});
    EXPECT_EQ(flat.statistic, 0.0);
    EXPECT_EQ(flat.p_value, 1.0);
    EXPECT_THROW(chi_square_flatness({3}), InvalidArgument);
}

TEST(SupError, IdenticalAndOffsetPaths) {
    Rng rng = make_stream(13);
    const Matrix a = standard_normal(rng, 50, 2);
    EXPECT_EQ(sup_error({a, a}, {a, a}), 0.0);
    const Matrix off = a.array() + 0.5;
    // each row is off by (0.5, 0.5)
    EXPECT_NEAR(sup_error({a}, {off}), 0.5, 1e-14);
    Matrix spike = a;
    spike(17, 0) += 3.0;
    EXPECT_NEAR(sup_error({a, a}, {a, spike}), 4.5, 1e-12);
}

TEST(LogLogSlope, PowerLaw) {
    std::vector<double> x{0.1, 0.2, 0.4, 0.8}, y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 2.5));
    EXPECT_NEAR(loglog_slope(x, y), 2.5, 1e-12);
    EXPECT_THROW(loglog_slope({1.0}, {1.0}), InvalidArgument);
    EXPECT_THROW(loglog_slope({1.0, 2.0}, {1.0, 0.0}), InvalidArgument);
}

TEST(CurveResult, CsvHasStderrColumnWhenPresent) {
    mdyn::testing::TempDir dir("stats");
    CurveResult c{Vector::LinSpaced(3, 0, 2), Vector::Ones(3), Vector::Zero(3)};
    c.write_csv(dir / "c.csv", "lag", "acf");
    std::ifstream in(dir / "c.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "lag,acf,stderr");
}
