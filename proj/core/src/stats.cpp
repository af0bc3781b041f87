#include "mdyn/stats.hpp"

#include "mdyn/errors.hpp"
#include "mdyn/matrix_io.hpp"

#include <Eigen/QR>
#include <boost/math/distributions/chi_squared.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mdyn {

namespace {

Vector lag_axis(int max_lag, double tau) {
    Vector a(max_lag + 1);
    for (int l = 0; l <= max_lag; ++l) a(l) = l * tau;
    return a;
}

void check_finite(const Eigen::Ref<const Vector>& v, const char* what) {
    if (!v.allFinite()) throw NonFiniteError(std::string(what) + ": input contains non-finite values");
}

}  // namespace

void CurveResult::write_csv(const std::filesystem::path& path, const std::string& x_name,
                            const std::string& y_name) const {
    const bool with_se = stderr_values.size() == values.size() && values.size() > 0;
    Matrix m(values.size(), with_se ? 3 : 2);
    m.col(0) = abscissa;
    m.col(1) = values;
    if (with_se) m.col(2) = stderr_values;
    std::vector<std::string> header{x_name, y_name};
    if (with_se) header.emplace_back("stderr");
    io::write_matrix_csv(m, path, header);
}

CurveResult acf(const Eigen::Ref<const Vector>& series, int max_lag, bool normalize, double tau) {
    if (max_lag < 0) throw InvalidArgument("acf: max_lag must be >= 0");
    if (series.size() <= max_lag) throw LengthError("acf: series must be longer than max_lag");
    check_finite(series, "acf");
    const Eigen::Index N = series.size();
    const Vector c = series.array() - series.mean();
    CurveResult r;
    r.abscissa = lag_axis(max_lag, tau);
    r.values.resize(max_lag + 1);
    for (int l = 0; l <= max_lag; ++l) {
        r.values(l) = c.head(N - l).dot(c.tail(N - l)) / static_cast<double>(N - l);
    }
    if (normalize) {
        const double v0 = r.values(0);
        if (!(v0 > 0.0)) throw InvalidArgument("acf: zero variance, cannot normalize");
        r.values /= v0;
        r.values(0) = 1.0;
    }
    return r;
}

CurveResult acf_columns(const Eigen::Ref<const Matrix>& series, int max_lag, double tau) {
    const Eigen::Index K = series.cols();
    if (K == 0) throw DimensionError("acf: no columns");
    Matrix all(max_lag + 1, K);
    for (Eigen::Index k = 0; k < K; ++k) all.col(k) = acf(series.col(k), max_lag, true, tau).values;
    CurveResult r;
    r.abscissa = lag_axis(max_lag, tau);
    r.values = all.rowwise().mean();
    if (K > 1) {
        const Matrix dev = all.colwise() - r.values;
        r.stderr_values =
            (dev.rowwise().squaredNorm() / static_cast<double>(K - 1)).cwiseSqrt() / std::sqrt(static_cast<double>(K));
    }
    return r;
}

CurveResult ccf(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, int max_lag, double tau) {
    if (a.size() != b.size()) throw DimensionError("ccf: series lengths differ");
    if (max_lag < 0 || a.size() <= max_lag) throw LengthError("ccf: series must be longer than max_lag");
    check_finite(a, "ccf");
    check_finite(b, "ccf");
    const Eigen::Index N = a.size();
    const Vector ca = a.array() - a.mean();
    const Vector cb = b.array() - b.mean();
    const double v0 = ca.squaredNorm() / static_cast<double>(N);
    if (!(v0 > 0.0)) throw InvalidArgument("ccf: zero variance, cannot normalize");
    CurveResult r;
    r.abscissa = lag_axis(max_lag, tau);
    r.values.resize(max_lag + 1);
    for (int l = 0; l <= max_lag; ++l) {
        r.values(l) = ca.tail(N - l).dot(cb.head(N - l)) / static_cast<double>(N - l) / v0;
    }
    return r;
}

double silverman_bandwidth(const Eigen::Ref<const Vector>& s) {
    const Eigen::Index n = s.size();
    if (n < 2) throw LengthError("bandwidth: need at least two samples");
    const double mu = s.mean();
    const double sd = std::sqrt((s.array() - mu).square().sum() / static_cast<double>(n - 1));
    std::vector<double> v(s.data(), s.data() + n);
    std::sort(v.begin(), v.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(n - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double f = pos - static_cast<double>(i);
        return i + 1 < v.size() ? v[i] * (1 - f) + v[i + 1] * f : v[i];
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    if (!(spread > 0.0)) throw InvalidArgument("bandwidth: zero spread");
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

PdfEstimate pdf_estimate(const Eigen::Ref<const Vector>& s, int n_bins, double lo, double hi, double bandwidth) {
    if (n_bins < 1) throw InvalidArgument("pdf: n_bins must be >= 1");
    if (!(hi > lo)) throw InvalidArgument("pdf: empty range");
    if (s.size() < 1) throw LengthError("pdf: empty series");
    check_finite(s, "pdf");
    const double w = (hi - lo) / n_bins;
    Vector counts = Vector::Zero(n_bins);
    Eigen::Index inside = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double v = s(i);
        if (v < lo || v > hi) continue;
        int b = static_cast<int>((v - lo) / w);
        b = std::clamp(b, 0, n_bins - 1);
        counts(b) += 1.0;
        ++inside;
    }
    PdfEstimate out;
    out.bin_width = w;
    Vector centres(n_bins);
    for (int b = 0; b < n_bins; ++b) centres(b) = lo + (b + 0.5) * w;
    out.histogram.abscissa = centres;
    out.histogram.values = inside > 0 ? Vector(counts / (static_cast<double>(inside) * w)) : Vector(counts);

    const bool spread = s.size() > 1 && s.maxCoeff() > s.minCoeff();
    out.bandwidth = bandwidth > 0.0 ? bandwidth : (spread ? silverman_bandwidth(s) : w);
    const double hbw = out.bandwidth;
    const double norm = 1.0 / (static_cast<double>(s.size()) * hbw * std::sqrt(2.0 * std::numbers::pi));
    out.kde.abscissa = centres;
    out.kde.values.resize(n_bins);
    for (int b = 0; b < n_bins; ++b) {
        out.kde.values(b) = norm * ((s.array() - centres(b)) / hbw).square().unaryExpr([](double u) {
            return std::exp(-0.5 * u);
        }).sum();
    }
    return out;
}

PdfEstimate pdf_estimate(const Eigen::Ref<const Vector>& s, int n_bins) {
    if (s.size() < 1) throw LengthError("pdf: empty series");
    double lo = s.minCoeff(), hi = s.maxCoeff();
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    return pdf_estimate(s, n_bins, lo, hi);
}

double histogram_l1_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, int n_bins,
                             double lo, double hi) {
    const PdfEstimate pa = pdf_estimate(a, n_bins, lo, hi);
    const PdfEstimate pb = pdf_estimate(b, n_bins, lo, hi);
    return (pa.histogram.values - pb.histogram.values).cwiseAbs().sum() * pa.bin_width;
}

Eigen::VectorXcd spatial_dft(const Eigen::Ref<const Vector>& row) {
    Eigen::FFT<double> fft;
    std::vector<double> in(row.data(), row.data() + row.size());
    std::vector<std::complex<double>> out;
    fft.fwd(out, in);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i) v(static_cast<Eigen::Index>(i)) = out[i];
    return v;
}

WaveStatistics wave_statistics(const Eigen::Ref<const Matrix>& X) {
    const Eigen::Index T = X.rows();
    const Eigen::Index K = X.cols();
    if (T < 1 || K < 1) throw LengthError("wave statistics: empty field");
    const Eigen::Index nm = K / 2 + 1;
    Eigen::MatrixXcd U(T, nm);
    for (Eigen::Index t = 0; t < T; ++t) U.row(t) = spatial_dft(X.row(t).transpose()).head(nm).transpose();
    WaveStatistics ws;
    ws.wavenumber = Vector::LinSpaced(nm, 0.0, static_cast<double>(nm - 1));
    ws.mean_amplitude = U.cwiseAbs().colwise().mean().transpose();
    const Eigen::RowVectorXcd mean = U.colwise().mean();
    ws.variance = (U.rowwise() - mean).cwiseAbs2().colwise().mean().transpose();
    return ws;
}

SkillCurves rmse_ancr(const std::vector<Matrix>& truth, const std::vector<std::vector<Matrix>>& forecasts,
                      const Vector& climatology, double tau) {
    if (truth.empty() || truth.size() != forecasts.size()) {
        throw DimensionError("skill: need one forecast ensemble per truth path");
    }
    const Eigen::Index T = truth.front().rows();
    const Eigen::Index K = truth.front().cols();
    if (climatology.size() != K) throw DimensionError("skill: climatology length must equal the state dimension");
    Vector se = Vector::Zero(T), num = Vector::Zero(T), vf = Vector::Zero(T), vt = Vector::Zero(T);
    double count = 0.0;
    for (std::size_t c = 0; c < truth.size(); ++c) {
        if (truth[c].rows() != T || truth[c].cols() != K) throw DimensionError("skill: truth paths differ in shape");
        const Matrix at = truth[c].rowwise() - climatology.transpose();
        for (const Matrix& f : forecasts[c]) {
            if (f.rows() != T || f.cols() != K) throw DimensionError("skill: forecast shape differs from truth");
            se += (f - truth[c]).rowwise().squaredNorm();
            const Matrix af = f.rowwise() - climatology.transpose();
            num += af.cwiseProduct(at).rowwise().sum();
            vf += af.rowwise().squaredNorm();
            vt += at.rowwise().squaredNorm();
            count += 1.0;
        }
    }
    if (count == 0.0) throw DimensionError("skill: no forecast members");
    SkillCurves out;
    out.rmse.abscissa = lag_axis(static_cast<int>(T) - 1, tau);
    out.ancr.abscissa = out.rmse.abscissa;
    out.rmse.values = (se / (count * static_cast<double>(K))).cwiseSqrt();
    out.ancr.values.resize(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        const double den = std::sqrt(vf(t) * vt(t));
        out.ancr.values(t) = den > 0.0 ? num(t) / den : 0.0;
    }
    return out;
}

int truth_rank(double truth, const std::vector<double>& ensemble, Rng& rng) {
    int below = 0, ties = 0;
    for (double v : ensemble) {
        if (v < truth) ++below;
        else if (v == truth) ++ties;
    }
    if (ties == 0) return below;
    std::uniform_int_distribution<int> pick(0, ties);
    return below + pick(rng);
}

std::vector<long> rank_histogram(const std::vector<Matrix>& truth, const std::vector<std::vector<Matrix>>& ensemble,
                                 const std::vector<int>& leads, Rng& rng) {
    if (truth.size() != ensemble.size() || truth.empty()) throw DimensionError("rank histogram: case count mismatch");
    const std::size_t n = ensemble.front().size();
    if (n == 0) throw DimensionError("rank histogram: empty ensemble");
    std::vector<long> counts(n + 1, 0);
    std::vector<double> vals(n);
    for (std::size_t c = 0; c < truth.size(); ++c) {
        if (ensemble[c].size() != n) throw DimensionError("rank histogram: ensemble sizes differ");
        for (int lead : leads) {
            if (lead < 0 || lead >= truth[c].rows()) throw LengthError("rank histogram: lead beyond the path");
            for (Eigen::Index k = 0; k < truth[c].cols(); ++k) {
                for (std::size_t e = 0; e < n; ++e) vals[e] = ensemble[c][e](lead, k);
                ++counts[static_cast<std::size_t>(truth_rank(truth[c](lead, k), vals, rng))];
            }
        }
    }
    return counts;
}

ChiSquareResult chi_square_flatness(const std::vector<long>& counts) {
    if (counts.size() < 2) throw InvalidArgument("chi-square: need at least two bins");
    double total = 0.0;
    for (long c : counts) total += static_cast<double>(c);
    if (!(total > 0.0)) throw InvalidArgument("chi-square: empty histogram");
    const double expected = total / static_cast<double>(counts.size());
    double stat = 0.0;
    for (long c : counts) stat += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    const int dof = static_cast<int>(counts.size()) - 1;
    const boost::math::chi_squared_distribution<double> dist(dof);
    return {stat, dof, boost::math::cdf(boost::math::complement(dist, stat))};
}

double sup_error(const std::vector<Matrix>& full_paths, const std::vector<Matrix>& closure_paths) {
    if (full_paths.size() != closure_paths.size() || full_paths.empty()) {
        throw DimensionError("sup error: need matching, non-empty path sets");
    }
    double acc = 0.0;
    for (std::size_t r = 0; r < full_paths.size(); ++r) {
        if (full_paths[r].rows() != closure_paths[r].rows() || full_paths[r].cols() != closure_paths[r].cols()) {
            throw DimensionError("sup error: path shapes differ");
        }
        acc += (full_paths[r] - closure_paths[r]).rowwise().squaredNorm().maxCoeff();
    }
    return acc / static_cast<double>(full_paths.size());
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope: need at least two points");
    const auto n = static_cast<Eigen::Index>(x.size());
    Matrix A(n, 2);
    Vector b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("slope: values must be positive");
        A(i, 0) = 1.0;
        A(i, 1) = std::log(x[i]);
        b(i) = std::log(y[i]);
    }
    return A.colPivHouseholderQr().solve(b)(1);
}

}  // namespace mdyn
