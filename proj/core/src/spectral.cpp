#include "mdyn/spectral.hpp"

#include "mdyn/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <complex>
#include <numbers>

namespace mdyn {

namespace {

Matrix toeplitz(const Vector& g) {
    const Eigen::Index n = g.size();
    Matrix T(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) T(i, j) = g(std::abs(i - j));
    return T;
}

}  // namespace

MemoryWeights memory_weights_from_covariances(const Vector& gamma_xx, const Vector& gamma_xy, double tau) {
    if (gamma_xx.size() < 1 || gamma_xx.size() != gamma_xy.size()) {
        throw DimensionError("memory weights: covariance sequences must have equal, non-zero length");
    }
    if (!gamma_xx.allFinite() || !gamma_xy.allFinite()) throw NonFiniteError("memory weights: non-finite covariances");
    const Matrix T = toeplitz(gamma_xx);
    Eigen::LLT<Matrix> llt(T);
    if (llt.info() != Eigen::Success) {
        throw ConditioningError("memory weights: Toeplitz covariance matrix is not positive definite");
    }
    MemoryWeights w;
    w.S = llt.solve(gamma_xy);  // T symmetric, so S T = gamma_xy^T transposes to T S^T = gamma_xy
    w.tau = tau;
    w.m = static_cast<int>(gamma_xx.size()) - 1;
    return w;
}

double verify_convolution_identity(const MemoryWeights& w, const Vector& gamma_xx, const Vector& gamma_xy) {
    const Eigen::Index n = w.S.size();
    if (gamma_xx.size() != n || gamma_xy.size() != n) throw DimensionError("convolution identity: length mismatch");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) acc += w.S(k) * gamma_xx(std::abs(i - k));
        worst = std::max(worst, std::abs(acc - gamma_xy(i)));
    }
    return worst;
}

Eigen::VectorXcd weights_dft(const MemoryWeights& w, const Vector& omega) {
    Eigen::VectorXcd out(omega.size());
    for (Eigen::Index j = 0; j < omega.size(); ++j) {
        std::complex<double> acc = 0.0;
        for (Eigen::Index n = 0; n < w.S.size(); ++n) {
            acc += w.S(n) * std::polar(1.0, -omega(j) * static_cast<double>(n) * w.tau);
        }
        out(j) = acc;
    }
    return out;
}

void analytic_covariances(const LinearGaussianParams& p, int m, double tau, Vector& gamma_xx, Vector& gamma_xy) {
    if (m < 0) throw InvalidArgument("analytic covariances: m must be >= 0");
    gamma_xx.resize(m + 1);
    gamma_xy.resize(m + 1);
    for (int n = 0; n <= m; ++n) {
        // Cov(w_{t+l}, w_t) = exp(A l) S; row 0 gives x_{t+l}, row 1 gives y_{t+l}
        const Eigen::Matrix2d C = lagged_covariance(p, n * tau);
        gamma_xx(n) = C(0, 0);
        gamma_xy(n) = C(1, 0);
    }
}

Vector analytic_spectrum_full(const LinearGaussianParams& p, const Vector& omega) {
    p.validate();
    const double e = p.eps;
    const double c0 = p.a22 / e;
    const double d0 = p.a12 / std::sqrt(e);
    const double w02 = (p.a11 * p.a22 - p.a12 * p.a21) / e;
    const double g0 = p.a11 + p.a22 / e;
    const double sx2 = p.sigma_x * p.sigma_x, sy2 = p.sigma_y * p.sigma_y;
    Vector out(omega.size());
    for (Eigen::Index j = 0; j < omega.size(); ++j) {
        const double w = omega(j);
        const double num = (w * w + c0 * c0) * sx2 + d0 * d0 * sy2;
        const double den = (w02 - w * w) * (w02 - w * w) + g0 * g0 * w * w;
        out(j) = num / den;
    }
    return out;
}

Vector closure_spectrum_limit(const LinearGaussianParams& p, const Vector& omega) {
    p.validate();
    using C = std::complex<double>;
    const double e = p.eps;
    const C I(0.0, 1.0);
    Vector out(omega.size());
    for (Eigen::Index j = 0; j < omega.size(); ++j) {
        const double w = omega(j);
        const C D = (I * w - p.a11) * (I * w - p.a22 / e) - p.a12 * p.a21 / e;
        double acc = 0.0;
        for (int q = 0; q < 4; ++q) {
            const C xi_x(1.0, 0.0);
            const C xi_y = std::polar(1.0, std::numbers::pi / 4.0 + q * std::numbers::pi / 2.0);
            const C xh = ((I * w - p.a22 / e) * p.sigma_x * xi_x + p.a12 * p.sigma_y / std::sqrt(e) * xi_y) / D;
            const C yh = ((I * w - p.a11) * p.sigma_y / std::sqrt(e) * xi_y + p.a21 / e * p.sigma_x * xi_x) / D;
            const C X = p.sigma_x * xi_x / (I * w - p.a11 - p.a12 * (yh / xh));
            acc += std::norm(X);
        }
        out(j) = 0.25 * acc;
    }
    return out;
}

Vector default_omega_grid(double tau, int points) {
    if (!(tau > 0.0) || points < 2) throw InvalidArgument("omega grid: need tau > 0 and at least two points");
    return Vector::LinSpaced(points, 0.0, std::numbers::pi / tau);
}

Vector acv_from_spectrum(const LinearGaussianParams& p, const std::vector<double>& lags, double omega_max,
                         int intervals) {
    if (intervals < 2 || intervals % 2 != 0) throw InvalidArgument("acv_from_spectrum: intervals must be even");
    const Vector w = Vector::LinSpaced(intervals + 1, 0.0, omega_max);
    const double sx2 = p.sigma_x * p.sigma_x;
    const Vector rem = analytic_spectrum_full(p, w).array() - sx2 / (w.array().square() + 1.0);
    const double h = omega_max / intervals;
    Vector out(static_cast<Eigen::Index>(lags.size()));
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const double l = lags[i];
        double acc = 0.0;
        for (int j = 0; j <= intervals; ++j) {
            const double coef = (j == 0 || j == intervals) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            acc += coef * rem(j) * std::cos(w(j) * l);
        }
        acc *= h / 3.0;
        out(static_cast<Eigen::Index>(i)) = acc / std::numbers::pi + 0.5 * sx2 * std::exp(-std::abs(l));
    }
    return out;
}

}  // namespace mdyn
