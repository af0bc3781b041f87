#include "mdyn/closure.hpp"

#include "mdyn/errors.hpp"
#include "mdyn/linalg.hpp"
#include "mdyn/parallel.hpp"

#include <cmath>
#include <string>

namespace mdyn {

int x_history_rows(const DelayConfig& cfg) noexcept { return cfg.m + 1 > 1 ? cfg.m + 1 : 1; }

ClosureState::ClosureState(Matrix x_history, Matrix y_history, std::size_t t)
    : x_(std::move(x_history)), y_(std::move(y_history)), t_(t) {
    if (x_.rows() < 1 || x_.cols() < 1) throw DimensionError("closure state needs at least one x row");
    if (!x_.allFinite() || !y_.allFinite()) throw NonFiniteError("closure state buffers must be finite");
}

void ClosureState::push(const Vector& x_next, const Vector& y_emitted) {
    const Eigen::Index rx = x_.rows();
    if (rx > 1) x_.topRows(rx - 1) = x_.bottomRows(rx - 1).eval();
    x_.row(rx - 1) = x_next.transpose();
    const Eigen::Index ry = y_.rows();
    if (ry > 0) {
        if (ry > 1) y_.topRows(ry - 1) = y_.bottomRows(ry - 1).eval();
        y_.row(ry - 1) = y_emitted.transpose();
    }
    ++t_;
}

void ClosureState::set_x_history(Matrix x) {
    if (x.rows() != x_.rows() || x.cols() != x_.cols()) throw DimensionError("x history shape mismatch");
    x_ = std::move(x);
}

EmbeddingPredictor::EmbeddingPredictor(std::vector<ComponentEstimator> components, DelayConfig delay, int ny)
    : components_(std::move(components)), delay_(delay), ny_(ny) {
    delay_.validate();
    std::vector<int> written(static_cast<std::size_t>(ny_), 0);
    for (const auto& c : components_) {
        if (!c.model) throw InvalidArgument("closure component without a fitted model");
        const int nz = delay_.state_dim(static_cast<int>(c.x_cols.size()), static_cast<int>(c.y_cols.size()));
        if (c.model->input_dim() != nz) {
            throw DimensionError("closure component basis expects dimension " + std::to_string(c.model->input_dim()) +
                                 " but the delay configuration gives " + std::to_string(nz));
        }
        if (static_cast<int>(c.outputs.size()) != c.model->output_dim()) {
            throw DimensionError("closure component output count does not match its model");
        }
        for (int o : c.outputs) {
            if (o < 0 || o >= ny_) throw DimensionError("closure component output index out of range");
            ++written[static_cast<std::size_t>(o)];
        }
    }
    for (int w : written) {
        if (w != 1) throw InvalidArgument("every y entry must be written by exactly one closure component");
    }
}

Vector EmbeddingPredictor::predict(const ClosureState& state) const {
    Vector out(ny_);
    const Matrix& xh = state.x_history();
    const Matrix& yh = state.y_history();
    const int xrows = delay_.m + 1;
    for (const auto& c : components_) {
        const int nz = c.model->input_dim();
        Vector z(nz);
        Eigen::Index k = 0;
        for (Eigen::Index r = xh.rows() - xrows; r < xh.rows(); ++r)
            for (int col : c.x_cols) z(k++) = xh(r, col);
        for (Eigen::Index r = 0; r < yh.rows(); ++r)
            for (int col : c.y_cols) z(k++) = yh(r, col);
        const Vector v = c.model->predict(z);
        for (std::size_t j = 0; j < c.outputs.size(); ++j) out(c.outputs[j]) = v(static_cast<Eigen::Index>(j));
    }
    return out;
}

void ClosureModel::set_residual_noise(const Matrix& cov) {
    if (cov.size() == 0) {
        residual_cov_.resize(0, 0);
        residual_sqrt_.resize(0, 0);
        return;
    }
    if (cov.rows() != cov.cols()) throw DimensionError("residual noise covariance must be square");
    const Matrix s = 0.5 * (cov + cov.transpose());
    if (!s.allFinite()) throw NonFiniteError("residual noise covariance is not finite");
    residual_cov_ = psd_repair(s);
    residual_sqrt_ = psd_sqrt(s);
}

bool ClosureModel::stochastic() const noexcept {
    return static_cast<bool>(second_moment) || (diffusion.size() > 0 && diffusion.cwiseAbs().maxCoeff() > 0.0);
}

int ClosureModel::noise_dim() const noexcept {
    if (second_moment) return nx;
    return static_cast<int>(diffusion.cols());
}

void ClosureModel::validate() const {
    delay.validate();
    if (!known_drift) throw InvalidArgument("closure: known drift is not set");
    if (nx < 1) throw InvalidArgument("closure: nx must be >= 1");
    if (ny < 0) throw InvalidArgument("closure: ny must be >= 0");
    if (!(tau > 0.0)) throw InvalidArgument("closure: tau must be > 0");
    if (substeps < 1) throw InvalidArgument("closure: substeps must be >= 1");
    if (diffusion.size() > 0 && diffusion.rows() != nx) throw DimensionError("closure: diffusion must have nx rows");
    if (!y_estimator && ny > 0) throw InvalidArgument("closure: y estimator is required when ny > 0");
    if (ny == 0 && delay.n > 0) throw InvalidArgument("closure: y memory requested without y variables");
    if (residual_cov_.size() > 0 && residual_cov_.rows() != ny) {
        throw DimensionError("closure: residual noise must be ny x ny");
    }
}

double divergence_bound_from(const TimeSeriesDataset& ds) { return 1e6 * ds.x().cwiseAbs().maxCoeff(); }

ClosureState seed_state(const TimeSeriesDataset& ds, std::size_t i, const DelayConfig& cfg) {
    cfg.validate();
    if (i >= ds.size()) throw LengthError("seed index " + std::to_string(i) + " is past the end of the dataset");
    if (i < static_cast<std::size_t>(cfg.depth())) {
        throw LengthError("seed index " + std::to_string(i) + " is shorter than the memory depth " +
                          std::to_string(cfg.depth()));
    }
    const auto ii = static_cast<Eigen::Index>(i);
    const int xr = x_history_rows(cfg);
    Matrix xh = ds.x().middleRows(ii - xr + 1, xr);
    Matrix yh = ds.y().middleRows(ii - cfg.n, cfg.n);
    return ClosureState(std::move(xh), std::move(yh), 0);
}

StepNoise draw_step_noise(const ClosureModel& model, Rng& rng) {
    StepNoise noise;
    if (model.stochastic()) {
        const double sh = std::sqrt(model.tau / model.substeps);
        noise.dW = standard_normal(rng, model.substeps, model.noise_dim()) * sh;
    }
    if (model.residual_noise_factor().size() > 0) noise.y_noise = standard_normal(rng, model.ny);
    return noise;
}

StepResult step(const ClosureModel& model, ClosureState& state, Rng& rng) {
    return step(model, state, draw_step_noise(model, rng));
}

StepResult step(const ClosureModel& model, ClosureState& state, const StepNoise& noise) {
    Vector y_hat = model.y_estimator ? model.y_estimator->predict(state) : Vector();
    if (y_hat.size() != model.ny) throw DimensionError("closure: y estimator returned the wrong dimension");
    if (model.residual_noise_factor().size() > 0) {
        if (noise.y_noise.size() != model.ny) throw DimensionError("closure: residual noise draw has wrong size");
        y_hat += model.residual_noise_factor() * noise.y_noise;
    }

    const Vector x0 = state.current_x();
    Vector x = x0;
    const double h = model.tau / model.substeps;
    if (model.stochastic()) {
        const Matrix S = model.second_moment ? psd_sqrt(model.second_moment(x0, state)) : model.diffusion;
        if (noise.dW.rows() != model.substeps || noise.dW.cols() != S.cols()) {
            throw DimensionError("closure: Brownian increments have the wrong shape");
        }
        for (int s = 0; s < model.substeps; ++s) {
            x += model.known_drift(x, y_hat) * h + S * noise.dW.row(s).transpose();
        }
    } else {
        for (int s = 0; s < model.substeps; ++s) {
            const Vector k1 = model.known_drift(x, y_hat);
            const Vector k2 = model.known_drift(x + 0.5 * h * k1, y_hat);
            const Vector k3 = model.known_drift(x + 0.5 * h * k2, y_hat);
            const Vector k4 = model.known_drift(x + h * k3, y_hat);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    if (!x.allFinite() || !y_hat.allFinite() || x.cwiseAbs().maxCoeff() > model.divergence_bound) {
        throw DivergenceError("closure diverged at step " + std::to_string(state.t()), state.t(), x0);
    }
    state.push(x, y_hat);
    return {std::move(x), std::move(y_hat)};
}

Trajectory simulate(const ClosureModel& model, ClosureState state, std::size_t steps, Rng& rng) {
    model.validate();
    Trajectory tr;
    tr.tau = model.tau;
    const auto n = static_cast<Eigen::Index>(steps);
    tr.x.resize(n + 1, model.nx);
    tr.y.resize(n + 1, model.ny);
    tr.x.row(0) = state.current_x().transpose();
    for (Eigen::Index k = 0; k < n; ++k) {
        StepResult r = step(model, state, rng);
        tr.x.row(k + 1) = r.x_next.transpose();
        tr.y.row(k) = r.y_hat.transpose();
    }
    if (model.ny > 0) tr.y.row(n) = model.y_estimator->predict(state).transpose();
    return tr;
}

std::vector<std::vector<Trajectory>> ensemble_simulate(const ClosureModel& model,
                                                       const std::vector<ClosureState>& seeds,
                                                       const EnsembleSpec& spec) {
    if (!(spec.perturbation_sd >= 0.0)) throw InvalidArgument("ensemble: perturbation sd must be >= 0");
    if (spec.members < 1) throw InvalidArgument("ensemble: at least one member is required");
    model.validate();
    std::vector<std::vector<Trajectory>> out(seeds.size(), std::vector<Trajectory>(spec.members));
    parallel_for(seeds.size() * spec.members, spec.threads, [&](std::size_t flat) {
        const std::size_t c = flat / spec.members;
        const std::size_t e = flat % spec.members;
        Rng rng = make_stream(spec.base_seed, c, e);
        ClosureState st = seeds[c];
        if (spec.perturbation_sd > 0.0) {
            const Matrix& xh = st.x_history();
            st.set_x_history(xh + spec.perturbation_sd * standard_normal(rng, xh.rows(), xh.cols()));
        }
        out[c][e] = simulate(model, std::move(st), spec.steps, rng);
    });
    return out;
}

}  // namespace mdyn
