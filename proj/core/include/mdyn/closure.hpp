#pragma once

#include "mdyn/data_model.hpp"
#include "mdyn/embedding.hpp"
#include "mdyn/random.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace mdyn {

/**
 * Memory buffers of a running closure.
 *
 * x_history holds x_{t-m..t} (oldest first). With m = -1 the delay state has
 * no x block, but the current x is still kept as the single row.
 * y_history holds the last n emitted y estimates, oldest first.
 */
class ClosureState {
public:
    ClosureState(Matrix x_history, Matrix y_history, std::size_t t = 0);

    [[nodiscard]] const Matrix& x_history() const noexcept { return x_; }
    [[nodiscard]] const Matrix& y_history() const noexcept { return y_; }
    [[nodiscard]] Vector current_x() const { return x_.row(x_.rows() - 1).transpose(); }
    [[nodiscard]] std::size_t t() const noexcept { return t_; }

    /// Shift both buffers by one step.
    void push(const Vector& x_next, const Vector& y_emitted);
    /// Overwrite the x history (used for ensemble perturbations).
    void set_x_history(Matrix x);

private:
    Matrix x_;
    Matrix y_;
    std::size_t t_;
};

/// Buffer sizes for a delay config: max(m + 1, 1) x rows, n y rows.
int x_history_rows(const DelayConfig& cfg) noexcept;

/// Produces the y estimate used during the next macro step.
class YPredictor {
public:
    virtual ~YPredictor() = default;
    [[nodiscard]] virtual Vector predict(const ClosureState& state) const = 0;
};

/// One scalar or vector estimator fed by a column subset of the buffers.
struct ComponentEstimator {
    std::shared_ptr<const ConditionalExpectationModel> model;
    std::vector<int> x_cols;   ///< resolved columns in its delay state
    std::vector<int> y_cols;   ///< y columns in its delay state
    std::vector<int> outputs;  ///< y entries it writes, one per model output
};

/// Assembles per-component delay states from the closure buffers.
class EmbeddingPredictor final : public YPredictor {
public:
    EmbeddingPredictor(std::vector<ComponentEstimator> components, DelayConfig delay, int ny);

    [[nodiscard]] Vector predict(const ClosureState& state) const override;
    [[nodiscard]] const std::vector<ComponentEstimator>& components() const noexcept { return components_; }

private:
    std::vector<ComponentEstimator> components_;
    DelayConfig delay_;
    int ny_;
};

/// Wraps a plain function, e.g. an analytic conditional mean.
class FunctionPredictor final : public YPredictor {
public:
    explicit FunctionPredictor(std::function<Vector(const ClosureState&)> f) : f_(std::move(f)) {}
    [[nodiscard]] Vector predict(const ClosureState& state) const override { return f_(state); }

private:
    std::function<Vector(const ClosureState&)> f_;
};

/// Resolved-variable drift f(x, y_hat).
using DriftFn = std::function<Vector(const Vector& x, const Vector& y_hat)>;
/// State-dependent second moment B(x, state); its PSD square root drives the noise.
using SecondMomentFn = std::function<Matrix(const Vector& x, const ClosureState& state)>;

struct ClosureModel {
    DriftFn known_drift;
    Matrix diffusion;            ///< constant n_x x n_w; empty means none
    SecondMomentFn second_moment;  ///< optional, overrides `diffusion`
    std::shared_ptr<const YPredictor> y_estimator;
    DelayConfig delay;
    int nx = 0;
    int ny = 0;
    double tau = 0.0;
    int substeps = 1;
    double divergence_bound = std::numeric_limits<double>::infinity();

    /// Gaussian noise with this covariance is added to y_hat once per step.
    void set_residual_noise(const Matrix& cov);
    [[nodiscard]] const Matrix& residual_noise() const noexcept { return residual_cov_; }
    [[nodiscard]] const Matrix& residual_noise_factor() const noexcept { return residual_sqrt_; }

    [[nodiscard]] bool stochastic() const noexcept;
    [[nodiscard]] int noise_dim() const noexcept;
    void validate() const;

private:
    Matrix residual_cov_;
    Matrix residual_sqrt_;
};

/// Divergence bound of 1e6 times the largest |x| seen in training.
double divergence_bound_from(const TimeSeriesDataset& ds);

/// Buffers filled from truth samples ending at index i.
ClosureState seed_state(const TimeSeriesDataset& ds, std::size_t i, const DelayConfig& cfg);

/// Randomness consumed by one macro step.
struct StepNoise {
    Matrix dW;       ///< substeps x noise_dim Brownian increments (already scaled by sqrt(h))
    Vector y_noise;  ///< ny standard normals for the residual noise, empty if unused
};

StepNoise draw_step_noise(const ClosureModel& model, Rng& rng);

struct StepResult {
    Vector x_next;
    Vector y_hat;
};

StepResult step(const ClosureModel& model, ClosureState& state, Rng& rng);
StepResult step(const ClosureModel& model, ClosureState& state, const StepNoise& noise);

struct Trajectory {
    double tau = 0.0;
    double t0 = 0.0;
    Matrix x;  ///< steps + 1 rows, the first is the initial x
    Matrix y;  ///< steps + 1 rows; row k is the y estimate used on step k, last row is the
               ///< estimate at the final state
};

Trajectory simulate(const ClosureModel& model, ClosureState state, std::size_t steps, Rng& rng);

struct EnsembleSpec {
    std::size_t members = 1;
    std::size_t steps = 0;
    double perturbation_sd = 0.0;
    std::uint64_t base_seed = 0;
    int threads = 1;
};

/// result[case][member]; member e of case c draws from make_stream(base_seed, c, e).
/// The perturbation is iid Gaussian on every row of the x history.
std::vector<std::vector<Trajectory>> ensemble_simulate(const ClosureModel& model,
                                                       const std::vector<ClosureState>& seeds,
                                                       const EnsembleSpec& spec);

}  // namespace mdyn
