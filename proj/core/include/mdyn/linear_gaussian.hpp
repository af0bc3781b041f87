#pragma once

#include "mdyn/closure.hpp"
#include "mdyn/data_model.hpp"
#include "mdyn/random.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <vector>

namespace mdyn {

/**
 * Two-scale linear system
 *   dx = (a11 x + a12 y) dt + sigma_x dW_x
 *   dy = (a21 x + a22 y) / eps dt + sigma_y / sqrt(eps) dW_y
 */
struct LinearGaussianParams {
    double a11 = -1.0;
    double a12 = 1.0;
    double a21 = -1.0;
    double a22 = -1.0;
    double eps = 1.0;
    double sigma_x = 1.4142135623730951;
    double sigma_y = 1.4142135623730951;

    void validate() const;
    [[nodiscard]] Eigen::Matrix2d drift_matrix() const;
    /// diag(sigma_x^2, sigma_y^2 / eps)
    [[nodiscard]] Eigen::Matrix2d noise_covariance() const;
};

/// Equilibrium covariance S solving A S + S A^T + Q = 0.
Eigen::Matrix2d lyapunov_equilibrium_cov(const LinearGaussianParams& p);

/// Cov(w_{t+lag}, w_t) = exp(A lag) S for w = (x, y).
Eigen::Matrix2d lagged_covariance(const LinearGaussianParams& p, double lag);

/// Cov(x_{t+l}, x_t) for each lag l (time units).
Vector analytic_acv_linear(const LinearGaussianParams& p, const std::vector<double>& lags);

/// a11 - a12 a21 / a22
double averaged_coefficient(const LinearGaussianParams& p);

/// s21 / s11, the slope of E[y | x] under the equilibrium law.
double conditional_mean_slope(const LinearGaussianParams& p);

/// Integration step used when none is given: min(1e-3, eps / 20).
double default_linear_dt(const LinearGaussianParams& p);

struct LinearGaussianOptions {
    double dt = 0.0;                              ///< 0 selects default_linear_dt
    std::optional<Eigen::Vector2d> initial;       ///< default: a draw from N(0, S)
    bool record_x_increments = false;
};

struct LinearGaussianRun {
    TimeSeriesDataset data;
    int substeps;             ///< integration steps per observation interval
    Matrix x_increments;      ///< (N - 1) x substeps dW_x values if recorded
};

/// Euler-Maruyama, observed every tau; N = round(T / tau) samples starting at t = 0.
LinearGaussianRun simulate_linear_gaussian(const LinearGaussianParams& p, double T, double tau, Rng& rng,
                                           const LinearGaussianOptions& options = {});

/// Closure dx = (a11 x + a12 y_hat) dt + sigma_x dW with the given y estimator.
ClosureModel linear_gaussian_closure(const LinearGaussianParams& p, std::shared_ptr<const YPredictor> y_estimator,
                                     const DelayConfig& delay, double tau, int substeps);

/// Markovian reduced model dx = a_tilde x dt + sigma_x dW.
ClosureModel averaged_model(const LinearGaussianParams& p, double tau, int substeps);

}  // namespace mdyn
