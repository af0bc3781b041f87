#include "mdyn/tbh.hpp"

#include "mdyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace mdyn {

void TBHParams::validate() const {
    if (Lambda < 2) throw InvalidArgument("tbh: Lambda must be >= 2");
    if (!(beta > 0.0)) throw InvalidArgument("tbh: beta must be > 0");
    if (!(dt > 0.0)) throw InvalidArgument("tbh: dt must be > 0");
}

CVector tbh_rhs(const TBHParams& p, const CVector& u) {
    const int L = p.Lambda;
    CVector du = CVector::Zero(p.size());
    const Complex mi(0.0, -0.5);
    for (int k = -L; k <= L; ++k) {
        if (k == 0) continue;
        Complex acc = 0.0;
        // p ranges so that both p and q = k - p lie in 1 <= |.| <= L
        const int lo = std::max(-L, k - L);
        const int hi = std::min(L, k + L);
        for (int q1 = lo; q1 <= hi; ++q1) {
            const int q2 = k - q1;
            if (q1 == 0 || q2 == 0) continue;
            acc += mode(u, L, q1) * mode(u, L, q2);
        }
        mode(du, L, k) = mi * static_cast<double>(k) * acc;
    }
    return du;
}

Complex tbh_forcing_F(const TBHParams& p, const CVector& u) {
    const int L = p.Lambda;
    Complex acc = 0.0;
    for (int q1 = -L; q1 <= L; ++q1) {
        const int q2 = 1 - q1;
        if (std::abs(q1) < 2 || std::abs(q2) < 2 || std::abs(q2) > L) continue;
        acc += mode(u, L, q1) * mode(u, L, q2);
    }
    return Complex(0.0, -0.5) * acc;
}

double tbh_energy(const TBHParams& p, const CVector& u) {
    return u.segment(p.Lambda + 1, p.Lambda).squaredNorm();
}

double tbh_reality_error(const TBHParams& p, const CVector& u) {
    double e = std::abs(mode(u, p.Lambda, 0));
    for (int k = 1; k <= p.Lambda; ++k) {
        e = std::max(e, std::abs(mode(u, p.Lambda, -k) - std::conj(mode(u, p.Lambda, k))));
    }
    return e;
}

void tbh_rk4_step(const TBHParams& p, CVector& u) {
    const double h = p.dt;
    const CVector k1 = tbh_rhs(p, u);
    const CVector k2 = tbh_rhs(p, u + 0.5 * h * k1);
    const CVector k3 = tbh_rhs(p, u + 0.5 * h * k2);
    const CVector k4 = tbh_rhs(p, u + h * k3);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

CVector tbh_initial_condition(const TBHParams& p, Rng& rng) {
    p.validate();
    const int L = p.Lambda;
    CVector u = CVector::Zero(p.size());
    const Vector g = standard_normal(rng, 2 * L);
    for (int k = 1; k <= L; ++k) mode(u, L, k) = Complex(g(2 * (k - 1)), g(2 * (k - 1) + 1)) / std::sqrt(2.0);
    const double target = static_cast<double>(L) * (static_cast<double>(L) / p.beta);
    const double scale = std::sqrt(target / tbh_energy(p, u));
    for (int k = 1; k <= L; ++k) {
        mode(u, L, k) *= scale;
        mode(u, L, -k) = std::conj(mode(u, L, k));
    }
    return u;
}

TBHRun simulate_tbh(const TBHParams& p, CVector u, double T, double tau, double discard) {
    p.validate();
    if (u.size() != p.size()) throw DimensionError("tbh: initial state has the wrong size");
    if (tbh_reality_error(p, u) > 1e-10) throw ConsistencyError("tbh: initial state violates the reality condition");
    if (!(tau >= p.dt) || !(T >= tau) || !(discard >= 0.0)) throw InvalidArgument("tbh: need dt <= tau <= T");
    const auto per_obs = static_cast<long>(std::llround(tau / p.dt));
    if (std::abs(static_cast<double>(per_obs) * p.dt - tau) > 1e-9 * tau) {
        throw InvalidArgument("tbh: tau must be an integer multiple of dt");
    }
    const auto burn = static_cast<long>(std::llround(discard / p.dt));
    const auto N = static_cast<Eigen::Index>(std::llround(T / tau));
    const int L = p.Lambda;

    auto advance = [&](std::size_t idx) {
        tbh_rk4_step(p, u);
        if (!u.allFinite()) throw DivergenceError("tbh: non-finite state", idx, Vector());
    };
    for (long i = 0; i < burn; ++i) advance(0);

    TBHRun run{TimeSeriesDataset(tau, Matrix::Zero(1, 2), Matrix::Zero(1, 4)), CVector(), 0.0, 0.0, 0.0};
    const double e0 = tbh_energy(p, u);
    Matrix x(N, 2), y(N, 4);
    for (Eigen::Index i = 0; i < N; ++i) {
        if (i > 0)
            for (long j = 0; j < per_obs; ++j) advance(static_cast<std::size_t>(i));
        const double re = tbh_reality_error(p, u);
        run.max_reality_error = std::max(run.max_reality_error, re);
        if (re > 1e-10) {
            throw ConsistencyError("tbh: reality condition violated by " + std::to_string(re) + " at sample " +
                                   std::to_string(i));
        }
        const Complex u1 = mode(u, L, 1);
        const Complex u2 = mode(u, L, 2);
        const Complex F = tbh_forcing_F(p, u);
        const Complex rhs1 = mode(tbh_rhs(p, u), L, 1);
        const Complex split = Complex(0.0, -1.0) * std::conj(u1) * u2 + F;
        run.max_identity_error = std::max(run.max_identity_error, std::abs(rhs1 - split));
        run.max_energy_drift = std::max(run.max_energy_drift, std::abs(tbh_energy(p, u) - e0) / e0);
        x.row(i) << u1.real(), u1.imag();
        y.row(i) << u2.real(), u2.imag(), F.real(), F.imag();
    }
    run.data = TimeSeriesDataset(tau, std::move(x), std::move(y));
    run.final_state = std::move(u);
    return run;
}

Vector tbh_reduced_drift(const Vector& x, const Vector& y) {
    // -i conj(u1) u2 + F with u1 = a + ib, u2 = c + id
    const double a = x(0), b = x(1), c = y(0), d = y(1);
    Vector out(2);
    out(0) = a * d - b * c + y(2);
    out(1) = -(a * c + b * d) + y(3);
    return out;
}

ClosureModel tbh_closure(std::shared_ptr<const YPredictor> y_estimator, const DelayConfig& delay, double tau,
                         int substeps) {
    ClosureModel m;
    m.known_drift = [](const Vector& x, const Vector& y) { return tbh_reduced_drift(x, y); };
    m.y_estimator = std::move(y_estimator);
    m.delay = delay;
    m.nx = 2;
    m.ny = 4;
    m.tau = tau;
    m.substeps = substeps;
    m.validate();
    return m;
}

}  // namespace mdyn
