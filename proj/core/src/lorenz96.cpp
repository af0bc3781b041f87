#include "mdyn/lorenz96.hpp"

#include "mdyn/errors.hpp"

#include <Eigen/QR>

#include <cmath>
#include <set>

namespace mdyn {

namespace {

inline Eigen::Index wrap(Eigen::Index i, Eigen::Index n) { return ((i % n) + n) % n; }

}  // namespace

void L96Params::validate() const {
    if (K < 4) throw InvalidArgument("l96: K must be >= 4");
    if (J < 1) throw InvalidArgument("l96: J must be >= 1");
    if (!(eps > 0.0)) throw InvalidArgument("l96: eps must be > 0");
    if (!std::isfinite(F) || !std::isfinite(hx) || !std::isfinite(hy)) {
        throw InvalidArgument("l96: parameters must be finite");
    }
}

Vector l96_coupling(const L96Params& p, const Vector& Y) {
    Vector B(p.K);
    for (int k = 0; k < p.K; ++k) B(k) = p.hx / p.J * Y.segment(static_cast<Eigen::Index>(k) * p.J, p.J).sum();
    return B;
}

Vector l96_resolved_drift(const L96Params& p, const Vector& X, const Vector& B) {
    const Eigen::Index K = X.size();
    Vector d(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        d(k) = X(wrap(k - 1, K)) * (X(wrap(k + 1, K)) - X(wrap(k - 2, K))) - X(k) + p.F + B(k);
    }
    return d;
}

void l96_rhs(const L96Params& p, const L96State& s, L96State& ds) {
    ds.X = l96_resolved_drift(p, s.X, l96_coupling(p, s.Y));
    const Eigen::Index n = s.Y.size();
    ds.Y.resize(n);
    const double inv = 1.0 / p.eps;
    for (Eigen::Index g = 0; g < n; ++g) {
        const Eigen::Index k = g / p.J;
        ds.Y(g) = inv * (s.Y(wrap(g + 1, n)) * (s.Y(wrap(g - 1, n)) - s.Y(wrap(g + 2, n))) - s.Y(g) + p.hy * s.X(k));
    }
}

void l96_rk4_step(const L96Params& p, L96State& s, double dt) {
    L96State k1, k2, k3, k4, tmp;
    l96_rhs(p, s, k1);
    tmp.X = s.X + 0.5 * dt * k1.X;
    tmp.Y = s.Y + 0.5 * dt * k1.Y;
    l96_rhs(p, tmp, k2);
    tmp.X = s.X + 0.5 * dt * k2.X;
    tmp.Y = s.Y + 0.5 * dt * k2.Y;
    l96_rhs(p, tmp, k3);
    tmp.X = s.X + dt * k3.X;
    tmp.Y = s.Y + dt * k3.Y;
    l96_rhs(p, tmp, k4);
    s.X += (dt / 6.0) * (k1.X + 2.0 * k2.X + 2.0 * k3.X + k4.X);
    s.Y += (dt / 6.0) * (k1.Y + 2.0 * k2.Y + 2.0 * k3.Y + k4.Y);
}

L96State l96_initial_condition(const L96Params& p, Rng& rng) {
    p.validate();
    L96State s;
    s.X = standard_normal(rng, p.K);
    s.Y = 0.1 * standard_normal(rng, static_cast<Eigen::Index>(p.K) * p.J);
    return s;
}

L96Run simulate_l96(const L96Params& p, double T, double tau, double dt, L96State s, double discard) {
    p.validate();
    if (!(dt > 0.0) || !(tau >= dt) || !(T >= tau) || !(discard >= 0.0)) {
        throw InvalidArgument("l96: need 0 < dt <= tau <= T and discard >= 0");
    }
    if (s.X.size() != p.K || s.Y.size() != static_cast<Eigen::Index>(p.K) * p.J) {
        throw DimensionError("l96: initial state has the wrong size");
    }
    const auto per_obs = static_cast<long>(std::llround(tau / dt));
    if (std::abs(static_cast<double>(per_obs) * dt - tau) > 1e-9 * tau) {
        throw InvalidArgument("l96: tau must be an integer multiple of dt");
    }
    const auto burn = static_cast<long>(std::llround(discard / dt));
    const auto N = static_cast<Eigen::Index>(std::llround(T / tau));

    auto advance = [&](std::size_t step_index) {
        const Vector last = s.X;
        l96_rk4_step(p, s, dt);
        if (!s.X.allFinite() || !s.Y.allFinite()) {
            throw DivergenceError("l96: non-finite state", step_index, last);
        }
    };
    for (long i = 0; i < burn; ++i) advance(0);

    Matrix x(N, p.K), b(N, p.K);
    for (Eigen::Index i = 0; i < N; ++i) {
        if (i > 0)
            for (long j = 0; j < per_obs; ++j) advance(static_cast<std::size_t>(i));
        x.row(i) = s.X.transpose();
        b.row(i) = l96_coupling(p, s.Y).transpose();
    }
    return L96Run{TimeSeriesDataset(tau, std::move(x), std::move(b)), std::move(s)};
}

std::array<double, 6> wilks_fit(const Eigen::Ref<const Vector>& X, const Eigen::Ref<const Vector>& B) {
    if (X.size() != B.size()) throw DimensionError("wilks_fit: X and B lengths differ");
    std::set<double> distinct(X.data(), X.data() + X.size());
    if (distinct.size() < 6) throw RankError("wilks_fit: at least 6 distinct X values are required");
    Matrix V(X.size(), 6);
    for (Eigen::Index i = 0; i < X.size(); ++i) {
        double v = 1.0;
        for (int j = 0; j < 6; ++j, v *= X(i)) V(i, j) = v;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(V);
    if (qr.rank() < 6) throw RankError("wilks_fit: Vandermonde matrix is rank deficient");
    const Vector c = qr.solve(B);
    std::array<double, 6> out{};
    for (int j = 0; j < 6; ++j) out[static_cast<std::size_t>(j)] = c(j);
    return out;
}

double wilks_evaluate(const std::array<double, 6>& b, double x) {
    double r = b[5];
    for (int j = 4; j >= 0; --j) r = r * x + b[static_cast<std::size_t>(j)];
    return r;
}

std::shared_ptr<const YPredictor> wilks_predictor(const std::array<double, 6>& b, int K) {
    return std::make_shared<FunctionPredictor>([b, K](const ClosureState& s) {
        const Vector x = s.current_x();
        Vector out(K);
        for (int k = 0; k < K; ++k) out(k) = wilks_evaluate(b, x(k));
        return out;
    });
}

ClosureModel l96_closure(const L96Params& p, std::shared_ptr<const YPredictor> y_estimator, const DelayConfig& delay,
                         double tau, int substeps) {
    p.validate();
    ClosureModel m;
    m.known_drift = [p](const Vector& x, const Vector& b) { return l96_resolved_drift(p, x, b); };
    m.y_estimator = std::move(y_estimator);
    m.delay = delay;
    m.nx = p.K;
    m.ny = p.K;
    m.tau = tau;
    m.substeps = substeps;
    m.validate();
    return m;
}

}  // namespace mdyn
