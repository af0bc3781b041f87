#pragma once

#include "mdyn/data_model.hpp"
#include "mdyn/linear_gaussian.hpp"

#include <Eigen/Core>

namespace mdyn {

/**
 * Regression weights of y_t on (x_t, x_{t-1}, ..., x_{t-m}).
 *
 * S[n] multiplies x_{t-n} (lag order, newest first). Delay states built by
 * build_delay_states store x oldest first, so S[n] pairs with entry m - n.
 */
struct MemoryWeights {
    Vector S;
    double tau = 0.0;
    int m = 0;
};

/// Solves S Sigma22 = Sigma12 with Sigma22[k, n] = gamma_xx[|n - k|], Sigma12[n] = gamma_xy[n].
/// gamma_xy[n] = Cov(y_t, x_{t-n}).
MemoryWeights memory_weights_from_covariances(const Vector& gamma_xx, const Vector& gamma_xy, double tau = 0.0);

/// max_n |sum_k S[k] gamma_xx[n - k] - gamma_xy[n]| over n = 0..m.
double verify_convolution_identity(const MemoryWeights& w, const Vector& gamma_xx, const Vector& gamma_xy);

/// sum_n S[n] exp(-i omega n tau)
Eigen::VectorXcd weights_dft(const MemoryWeights& w, const Vector& omega);

/// gamma_xx[n] = Cov(x_t, x_{t-n}) and gamma_xy[n] = Cov(y_t, x_{t-n}) for n = 0..m.
void analytic_covariances(const LinearGaussianParams& p, int m, double tau, Vector& gamma_xx, Vector& gamma_xy);

/// Closed-form spectrum |x_hat(omega)|^2 of the full two-scale model (unit white-noise spectra).
Vector analytic_spectrum_full(const LinearGaussianParams& p, const Vector& omega);

/**
 * Spectrum of the m -> infinity memory closure
 *   i w X = a11 X + a12 (y_hat / x_hat) X + sigma_x xi_x,
 * with the ratio y_hat / x_hat taken from the full-model transforms. The
 * noise phases are averaged over four equally spaced values.
 */
Vector closure_spectrum_limit(const LinearGaussianParams& p, const Vector& omega);

/// 1024 points on [0, pi / tau].
Vector default_omega_grid(double tau, int points = 1024);

/**
 * Autocovariance of x recovered from the analytic spectrum,
 * (1 / pi) int_0^inf |x_hat|^2 cos(w l) dw, by Simpson quadrature on [0, omega_max]
 * after removing the sigma_x^2 / (w^2 + 1) tail, whose transform is known.
 */
Vector acv_from_spectrum(const LinearGaussianParams& p, const std::vector<double>& lags, double omega_max = 2000.0,
                         int intervals = 65536);

}  // namespace mdyn
