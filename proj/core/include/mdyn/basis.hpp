#pragma once

#include "mdyn/data_model.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace mdyn {

/// Orthonormal probabilists' Hermite values h_0(u)..h_max(u), h_k = He_k / sqrt(k!).
void normalized_hermite_values(double u, int max_degree, double* out);

/// All multi-indices with total degree <= d and each entry <= cap, ordered by
/// total degree, then lexicographically descending. The zero index comes first.
std::vector<std::vector<int>> total_degree_indices(int dim, int d, int cap);

/**
 * Tensor Hermite features under an empirically fitted Gaussian weight.
 *
 * Features are products of normalized Hermite polynomials evaluated in
 * whitened coordinates u = W (z - mu).
 */
class HermiteBasis {
public:
    HermiteBasis(Vector mean, Matrix whitening, std::vector<std::vector<int>> multi_indices);

    [[nodiscard]] const Vector& mean() const noexcept { return mean_; }
    [[nodiscard]] const Matrix& whitening() const noexcept { return whitening_; }
    [[nodiscard]] const std::vector<std::vector<int>>& multi_indices() const noexcept { return indices_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(indices_.size()); }
    [[nodiscard]] int input_dim() const noexcept { return static_cast<int>(mean_.size()); }

    [[nodiscard]] Vector evaluate(const Eigen::Ref<const Vector>& z) const;
    /// Row-wise evaluation; `out` must be Z.rows() x size().
    void evaluate_rows(const Eigen::Ref<const Matrix>& Z, Eigen::Ref<Matrix> out) const;

private:
    Vector mean_;
    Matrix whitening_;
    std::vector<std::vector<int>> indices_;
    std::vector<int> cap_;  // per-dimension highest degree in use
};

HermiteBasis fit_hermite(const Eigen::Ref<const Matrix>& Z, int max_total_degree, int per_dim_cap);

struct ModeCount {
    int count;
};
struct EnergyFraction {
    double fraction;  ///< cumulative share of sum(sigma^2), in (0, 1]
};
using ModeSelection = std::variant<ModeCount, EnergyFraction>;

/**
 * POD modes of the centered design matrix Z - 1 zbar^T = U S V^T.
 *
 * evaluate() is the Nystrom extension (z - zbar) V S^{-1}; at a training
 * row it reproduces the corresponding row of U.
 */
class PODBasis {
public:
    PODBasis(Vector z_bar, Matrix V, Vector sigma, std::size_t n_train);

    [[nodiscard]] const Vector& mean() const noexcept { return z_bar_; }
    [[nodiscard]] const Matrix& modes() const noexcept { return V_; }
    [[nodiscard]] const Vector& singular_values() const noexcept { return sigma_; }
    [[nodiscard]] std::size_t n_train() const noexcept { return n_train_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(sigma_.size()); }
    [[nodiscard]] int input_dim() const noexcept { return static_cast<int>(z_bar_.size()); }

    [[nodiscard]] Vector evaluate(const Eigen::Ref<const Vector>& z) const;
    void evaluate_rows(const Eigen::Ref<const Matrix>& Z, Eigen::Ref<Matrix> out) const;

    /// V S^{-1}, the linear map applied to centered inputs.
    [[nodiscard]] const Matrix& projection() const noexcept { return proj_; }

private:
    Vector z_bar_;
    Matrix V_;
    Vector sigma_;
    std::size_t n_train_;
    Matrix proj_;
};

PODBasis fit_pod(const Eigen::Ref<const Matrix>& Z, const ModeSelection& selection);

/**
 * Feature map phi(z) consumed by the estimators.
 *
 * Hermite features already contain the constant. POD features are prefixed
 * with the constant 1/sqrt(n_train), which keeps the training Gram matrix
 * equal to I / n_train.
 */
class Basis {
public:
    enum class Kind { hermite, pod };

    explicit Basis(HermiteBasis b) : impl_(std::move(b)) {}
    explicit Basis(PODBasis b) : impl_(std::move(b)) {}

    [[nodiscard]] Kind kind() const noexcept { return impl_.index() == 0 ? Kind::hermite : Kind::pod; }
    [[nodiscard]] int size() const noexcept;
    [[nodiscard]] int input_dim() const noexcept;

    [[nodiscard]] Vector features(const Eigen::Ref<const Vector>& z) const;
    void features_rows(const Eigen::Ref<const Matrix>& Z, Eigen::Ref<Matrix> out) const;

    [[nodiscard]] const HermiteBasis& hermite() const { return std::get<HermiteBasis>(impl_); }
    [[nodiscard]] const PODBasis& pod() const { return std::get<PODBasis>(impl_); }

private:
    std::variant<HermiteBasis, PODBasis> impl_;
};

/// Files `<prefix>basis.meta` plus CSV matrices inside `dir`.
void save_basis(const Basis& basis, const std::filesystem::path& dir, const std::string& prefix);
Basis load_basis(const std::filesystem::path& dir, const std::string& prefix);

}  // namespace mdyn
