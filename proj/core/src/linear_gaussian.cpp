#include "mdyn/linear_gaussian.hpp"

#include "mdyn/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace mdyn {

void LinearGaussianParams::validate() const {
    if (!(eps > 0.0)) throw InvalidArgument("linear_gaussian: eps must be > 0");
    if (sigma_x == 0.0 || sigma_y == 0.0) throw InvalidArgument("linear_gaussian: noise amplitudes must be non-zero");
    if (!(a22 < 0.0)) throw InvalidArgument("linear_gaussian: a22 must be < 0");
    if (!(a11 - a12 * a21 / a22 < 0.0)) throw InvalidArgument("linear_gaussian: averaged coefficient must be < 0");
    const Eigen::Vector2cd ev = drift_matrix().eigenvalues();
    if (!(ev.real().maxCoeff() < 0.0)) throw InvalidArgument("linear_gaussian: drift matrix is not Hurwitz");
}

Eigen::Matrix2d LinearGaussianParams::drift_matrix() const {
    Eigen::Matrix2d A;
    A << a11, a12, a21 / eps, a22 / eps;
    return A;
}

Eigen::Matrix2d LinearGaussianParams::noise_covariance() const {
    Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
    Q(0, 0) = sigma_x * sigma_x;
    Q(1, 1) = sigma_y * sigma_y / eps;
    return Q;
}

Eigen::Matrix2d lyapunov_equilibrium_cov(const LinearGaussianParams& p) {
    p.validate();
    const Eigen::Matrix2d A = p.drift_matrix();
    const Eigen::Matrix2d Q = p.noise_covariance();
    // unknowns (s11, s12, s22)
    Eigen::Matrix3d M;
    M << 2 * A(0, 0), 2 * A(0, 1), 0.0,
         A(1, 0), A(0, 0) + A(1, 1), A(0, 1),
         0.0, 2 * A(1, 0), 2 * A(1, 1);
    const Eigen::Vector3d rhs(-Q(0, 0), -Q(0, 1), -Q(1, 1));
    const Eigen::Vector3d s = M.fullPivLu().solve(rhs);
    Eigen::Matrix2d S;
    S << s(0), s(1), s(1), s(2);
    return S;
}

Eigen::Matrix2d lagged_covariance(const LinearGaussianParams& p, double lag) {
    const Eigen::Matrix2d S = lyapunov_equilibrium_cov(p);
    const Eigen::Matrix2d E = (p.drift_matrix() * lag).exp();
    return E * S;
}

Vector analytic_acv_linear(const LinearGaussianParams& p, const std::vector<double>& lags) {
    const Eigen::Matrix2d S = lyapunov_equilibrium_cov(p);
    const Eigen::Matrix2d A = p.drift_matrix();
    Vector out(static_cast<Eigen::Index>(lags.size()));
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const Eigen::Matrix2d E = (A * lags[i]).exp();
        out(static_cast<Eigen::Index>(i)) = (E * S)(0, 0);
    }
    return out;
}

double averaged_coefficient(const LinearGaussianParams& p) {
    if (p.a22 == 0.0) throw InvalidArgument("averaged coefficient: a22 must be non-zero");
    return p.a11 - p.a12 * p.a21 / p.a22;
}

double conditional_mean_slope(const LinearGaussianParams& p) {
    const Eigen::Matrix2d S = lyapunov_equilibrium_cov(p);
    return S(1, 0) / S(0, 0);
}

double default_linear_dt(const LinearGaussianParams& p) { return std::min(1e-3, p.eps / 20.0); }

LinearGaussianRun simulate_linear_gaussian(const LinearGaussianParams& p, double T, double tau, Rng& rng,
                                           const LinearGaussianOptions& options) {
    p.validate();
    if (!(tau > 0.0) || !(T >= tau)) throw InvalidArgument("linear_gaussian: need 0 < tau <= T");
    const double dt_req = options.dt > 0.0 ? options.dt : default_linear_dt(p);
    const int sub = std::max(1, static_cast<int>(std::ceil(tau / dt_req - 1e-9)));
    const double h = tau / sub;
    const auto N = static_cast<Eigen::Index>(std::llround(T / tau));

    Eigen::Vector2d w;
    if (options.initial) {
        w = *options.initial;
    } else {
        const Eigen::Matrix2d S = lyapunov_equilibrium_cov(p);
        const Eigen::Matrix2d Lc = Eigen::LLT<Eigen::Matrix2d>(S).matrixL();
        w = Lc * Eigen::Vector2d(standard_normal(rng, 2));
    }
    const double ax = p.a11, bx = p.a12, ay = p.a21 / p.eps, by = p.a22 / p.eps;
    const double sx = p.sigma_x * std::sqrt(h);
    const double sy = p.sigma_y / std::sqrt(p.eps) * std::sqrt(h);
    std::normal_distribution<double> nd;

    Matrix x(N, 1), y(N, 1);
    Matrix incr;
    if (options.record_x_increments) incr.resize(std::max<Eigen::Index>(N - 1, 0), sub);
    x(0, 0) = w(0);
    y(0, 0) = w(1);
    double xv = w(0), yv = w(1);
    for (Eigen::Index i = 1; i < N; ++i) {
        for (int s = 0; s < sub; ++s) {
            const double gx = nd(rng);
            const double gy = nd(rng);
            const double dx = (ax * xv + bx * yv) * h + sx * gx;
            const double dy = (ay * xv + by * yv) * h + sy * gy;
            xv += dx;
            yv += dy;
            if (options.record_x_increments) incr(i - 1, s) = gx * std::sqrt(h);
        }
        if (!std::isfinite(xv) || !std::isfinite(yv)) {
            throw DivergenceError("linear_gaussian: non-finite state", static_cast<std::size_t>(i),
                                  Eigen::Vector2d(x(i - 1, 0), y(i - 1, 0)));
        }
        x(i, 0) = xv;
        y(i, 0) = yv;
    }
    return LinearGaussianRun{TimeSeriesDataset(tau, std::move(x), std::move(y)), sub, std::move(incr)};
}

ClosureModel linear_gaussian_closure(const LinearGaussianParams& p, std::shared_ptr<const YPredictor> y_estimator,
                                     const DelayConfig& delay, double tau, int substeps) {
    p.validate();
    ClosureModel m;
    const double a11 = p.a11, a12 = p.a12;
    m.known_drift = [a11, a12](const Vector& x, const Vector& y) -> Vector {
        Vector d(1);
        d(0) = a11 * x(0) + a12 * y(0);
        return d;
    };
    m.diffusion = Matrix::Constant(1, 1, p.sigma_x);
    m.y_estimator = std::move(y_estimator);
    m.delay = delay;
    m.nx = 1;
    m.ny = 1;
    m.tau = tau;
    m.substeps = substeps;
    m.validate();
    return m;
}

ClosureModel averaged_model(const LinearGaussianParams& p, double tau, int substeps) {
    const double a = averaged_coefficient(p);
    ClosureModel m;
    m.known_drift = [a](const Vector& x, const Vector&) -> Vector { return a * x; };
    m.diffusion = Matrix::Constant(1, 1, p.sigma_x);
    m.delay = DelayConfig{0, 0};
    m.nx = 1;
    m.ny = 0;
    m.tau = tau;
    m.substeps = substeps;
    m.validate();
    return m;
}

}  // namespace mdyn
