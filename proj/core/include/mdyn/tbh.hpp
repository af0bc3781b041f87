#pragma once

#include "mdyn/closure.hpp"
#include "mdyn/data_model.hpp"
#include "mdyn/random.hpp"

#include <complex>
#include <memory>

namespace mdyn {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;

/**
 * Truncated Burgers-Hopf model
 *   du^k/dt = -(i k / 2) sum_{p + q = k, 1 <= |p|,|q| <= Lambda} u^p u^q.
 * States are stored over k = -Lambda..Lambda at index k + Lambda, with
 * u^0 = 0 and u^{-k} = conj(u^k).
 */
struct TBHParams {
    int Lambda = 50;
    double beta = 10.0;
    double dt = 1e-3;

    void validate() const;
    [[nodiscard]] int size() const noexcept { return 2 * Lambda + 1; }
};

inline Complex& mode(CVector& u, int Lambda, int k) { return u(k + Lambda); }
inline Complex mode(const CVector& u, int Lambda, int k) { return u(k + Lambda); }

CVector tbh_rhs(const TBHParams& p, const CVector& u);

/// Part of the mode-1 tendency not explained by -i conj(u^1) u^2.
Complex tbh_forcing_F(const TBHParams& p, const CVector& u);

/// sum_{k=1..Lambda} |u^k|^2
double tbh_energy(const TBHParams& p, const CVector& u);

/// max_k |u^{-k} - conj(u^k)| together with |u^0|.
double tbh_reality_error(const TBHParams& p, const CVector& u);

void tbh_rk4_step(const TBHParams& p, CVector& u);

/// Complex Gaussian modes rescaled so the mean energy per mode is exactly Lambda / beta.
CVector tbh_initial_condition(const TBHParams& p, Rng& rng);

struct TBHRun {
    TimeSeriesDataset data;  ///< x = (u1_re, u1_im), y = (u2_re, u2_im, F_re, F_im)
    CVector final_state;
    double max_reality_error = 0.0;
    double max_identity_error = 0.0;   ///< |rhs_1 - (-i conj(u1) u2 + F)| over stored steps
    double max_energy_drift = 0.0;     ///< relative, over stored steps
};

/// RK4 run; `discard` time units are dropped, then round(T / tau) samples are stored.
/// Raises ConsistencyError when the reality condition drifts beyond 1e-10.
TBHRun simulate_tbh(const TBHParams& p, CVector u0, double T, double tau, double discard = 0.0);

/// Reduced mode-1 closure; y_hat = (u2_re, u2_im, F_re, F_im).
ClosureModel tbh_closure(std::shared_ptr<const YPredictor> y_estimator, const DelayConfig& delay, double tau,
                         int substeps);

/// Drift of (u1_re, u1_im) given (u2_re, u2_im, F_re, F_im).
Vector tbh_reduced_drift(const Vector& x, const Vector& y);

}  // namespace mdyn
