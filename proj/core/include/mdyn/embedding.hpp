#pragma once

#include "mdyn/basis.hpp"
#include "mdyn/data_model.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace mdyn {

/**
 * Kernel-embedding estimate of E[g(Y) | z] on a truncated orthonormal basis.
 *
 * With Phi the M x L training feature matrix and C_zz = Phi^T Phi / M, the
 * coefficients are A = (G^T Phi / M)(C_zz + lambda I)^{-1}, so that
 * E[g(Y) | z] ~= A phi(z). For a POD basis with lambda = 0 this is ordinary
 * least squares on the centered delay states plus the target mean.
 */
class ConditionalExpectationModel {
public:
    ConditionalExpectationModel(Basis basis, Matrix coefficients, double lambda, Matrix c_zz, Matrix residual_cov);

    [[nodiscard]] const Basis& basis() const noexcept { return basis_; }
    [[nodiscard]] const Matrix& coefficients() const noexcept { return A_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] const Matrix& c_zz() const noexcept { return czz_; }
    [[nodiscard]] const Matrix& residual_cov() const noexcept { return residual_cov_; }
    [[nodiscard]] int output_dim() const noexcept { return static_cast<int>(A_.rows()); }
    [[nodiscard]] int input_dim() const noexcept { return basis_.input_dim(); }

    /// A phi(z). POD models use the equivalent collapsed affine map.
    [[nodiscard]] Vector predict(const Eigen::Ref<const Vector>& z) const;

    void save(const std::filesystem::path& dir, const std::string& prefix) const;
    static ConditionalExpectationModel load(const std::filesystem::path& dir, const std::string& prefix);

private:
    Basis basis_;
    Matrix A_;
    double lambda_;
    Matrix czz_;
    Matrix residual_cov_;
    // POD only: predict(z) = offset_ + linear_ * z
    Matrix linear_;
    Vector offset_;
};

struct FitOptions {
    Eigen::Index block_rows = 4096;  ///< rows of Phi materialised at a time
};

ConditionalExpectationModel fit_conditional_expectation(const DesignMatrices& dm, const Basis& basis, double lambda,
                                                        const FitOptions& options = {});

/**
 * Per-sample weights w_i(z) = [Phi (C_zz + lambda I)^{-1} phi(z)]_i / M.
 *
 * Conditional expectations of arbitrary functions a(x, y) become
 * sum_i a(x, y_i) w_i(z). Holds an M x L matrix, so build it only when
 * state-dependent drifts or diffusions are needed.
 */
class SampleWeightedEstimator {
public:
    SampleWeightedEstimator(const ConditionalExpectationModel& model, const Eigen::Ref<const Matrix>& z_train);

    [[nodiscard]] Vector weights(const Eigen::Ref<const Vector>& z) const;
    [[nodiscard]] Eigen::Index samples() const noexcept { return W_.rows(); }

private:
    Basis basis_;
    Matrix W_;
};

/// a(x_hat, y) evaluated on one training sample y.
using DriftSampler = std::function<Vector(const Vector& x_hat, const Eigen::Ref<const Vector>& y)>;
/// b(x_hat, y), an n_x x n_w matrix.
using DiffusionSampler = std::function<Matrix(const Vector& x_hat, const Eigen::Ref<const Vector>& y)>;

/// sum_l A_l(x_hat) phi_l(z) with A_l contracted from per-sample drift values.
Vector predict_general_drift(const SampleWeightedEstimator& est, const DriftSampler& a, const Vector& x_hat,
                             const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Matrix>& y_train);

/// E[b b^T | z], symmetrized with negative eigenvalues clipped at zero.
Matrix conditional_second_moment(const SampleWeightedEstimator& est, const DiffusionSampler& b, const Vector& x_hat,
                                 const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Matrix>& y_train);

/**
 * Truncated series p(y|z) = q(y) sum_k psi_k(y) c_k(z), c(z) = C_yz (C_zz + lambda I)^{-1} phi(z).
 *
 * q is the Gaussian with the empirical mean and covariance of the targets and
 * psi_k are Hermite polynomials orthonormal under q. Diagnostic only: the
 * series may be locally negative and is reported as is.
 */
class ConditionalDensityModel {
public:
    ConditionalDensityModel(HermiteBasis y_basis, Basis z_basis, Matrix coeff);

    [[nodiscard]] const HermiteBasis& y_basis() const noexcept { return y_basis_; }
    [[nodiscard]] const Basis& z_basis() const noexcept { return z_basis_; }
    [[nodiscard]] const Matrix& coefficients() const noexcept { return coeff_; }

    /// c(z), the expansion coefficients of p(.|z) on psi_k q.
    [[nodiscard]] Vector series_coefficients(const Eigen::Ref<const Vector>& z) const;
    [[nodiscard]] double weight(const Eigen::Ref<const Vector>& y) const;

private:
    HermiteBasis y_basis_;
    Basis z_basis_;
    Matrix coeff_;
    double log_norm_;
};

ConditionalDensityModel fit_conditional_density(const DesignMatrices& dm, int y_degree, const Basis& z_basis,
                                                double lambda);
double density_evaluate(const ConditionalDensityModel& model, const Eigen::Ref<const Vector>& y,
                        const Eigen::Ref<const Vector>& z);

}  // namespace mdyn
