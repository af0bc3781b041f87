#pragma once

#include "mdyn/closure.hpp"
#include "mdyn/data_model.hpp"
#include "mdyn/random.hpp"

#include <array>
#include <memory>

namespace mdyn {

/**
 * Two-layer Lorenz-96:
 *   dX^k/dt     = X^{k-1}(X^{k+1} - X^{k-2}) - X^k + F + B^k
 *   dY^{j,k}/dt = [Y^{j+1,k}(Y^{j-1,k} - Y^{j+2,k}) - Y^{j,k} + h_y X^k] / eps
 *   B^k         = (h_x / J) sum_j Y^{j,k}
 * Y is stored flat with index k*J + j and is cyclic over all K*J entries.
 */
struct L96Params {
    int K = 18;
    int J = 20;
    double F = 10.0;
    double hx = -1.0;
    double hy = 1.0;
    double eps = 0.5;

    void validate() const;
};

struct L96State {
    Vector X;  ///< K
    Vector Y;  ///< K * J
};

/// B^k from the fast variables.
Vector l96_coupling(const L96Params& p, const Vector& Y);

/// Resolved tendency given the coupling term B.
Vector l96_resolved_drift(const L96Params& p, const Vector& X, const Vector& B);

void l96_rhs(const L96Params& p, const L96State& s, L96State& ds);

/// One classical RK4 step of the full model.
void l96_rk4_step(const L96Params& p, L96State& s, double dt);

/// X ~ N(0, 1), Y ~ N(0, 0.01), all iid.
L96State l96_initial_condition(const L96Params& p, Rng& rng);

struct L96Run {
    TimeSeriesDataset data;  ///< x = X^k, y = B^k
    L96State final_state;
};

/// RK4 with step dt; `discard` time units are run first and dropped.
/// N = round(T / tau) samples are stored, the first at the end of the discard.
L96Run simulate_l96(const L96Params& p, double T, double tau, double dt, L96State initial, double discard = 0.0);

/// Least-squares quintic B = b0 + b1 X + ... + b5 X^5.
std::array<double, 6> wilks_fit(const Eigen::Ref<const Vector>& X, const Eigen::Ref<const Vector>& B);
double wilks_evaluate(const std::array<double, 6>& b, double x);

/// Predictor applying one quintic to every X^k independently.
std::shared_ptr<const YPredictor> wilks_predictor(const std::array<double, 6>& b, int K);

/// Deterministic closure of the resolved layer with B estimated by `y_estimator`.
ClosureModel l96_closure(const L96Params& p, std::shared_ptr<const YPredictor> y_estimator, const DelayConfig& delay,
                         double tau, int substeps);

}  // namespace mdyn
