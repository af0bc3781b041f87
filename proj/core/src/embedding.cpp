#include "mdyn/embedding.hpp"

#include "mdyn/errors.hpp"
#include "mdyn/linalg.hpp"
#include "mdyn/matrix_io.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mdyn {

namespace {

// Solve (C + lambda I) X = B, refusing near-singular systems.
Matrix regularized_solve(const Matrix& C, double lambda, const Matrix& B) {
    Matrix K = C;
    K.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(K);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13)) {
        throw ConditioningError("feature Gram matrix C_zz + lambda*I is singular or ill-conditioned (lambda = " +
                                io::format_double(lambda) + "); use a larger lambda");
    }
    return llt.solve(B);
}

void check_design(const DesignMatrices& dm, const Basis& basis) {
    if (dm.Z.rows() == 0 || dm.Z.rows() != dm.G.rows()) {
        throw DimensionError("design matrices need matching, non-zero row counts");
    }
    if (dm.Z.cols() != basis.input_dim()) {
        throw DimensionError("basis input dimension " + std::to_string(basis.input_dim()) +
                             " does not match delay state dimension " + std::to_string(dm.Z.cols()));
    }
}

}  // namespace

ConditionalExpectationModel::ConditionalExpectationModel(Basis basis, Matrix coefficients, double lambda, Matrix c_zz,
                                                         Matrix residual_cov)
    : basis_(std::move(basis)),
      A_(std::move(coefficients)),
      lambda_(lambda),
      czz_(std::move(c_zz)),
      residual_cov_(std::move(residual_cov)) {
    if (!(lambda_ >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    if (A_.cols() != basis_.size()) throw DimensionError("coefficient matrix width must equal the basis size");
    if (czz_.rows() != basis_.size() || czz_.cols() != basis_.size()) {
        throw DimensionError("C_zz must be L x L");
    }
    if (residual_cov_.rows() != A_.rows() || residual_cov_.cols() != A_.rows()) {
        throw DimensionError("residual covariance must be n_g x n_g");
    }
    if (basis_.kind() == Basis::Kind::pod) {
        const auto& p = basis_.pod();
        const double c = 1.0 / std::sqrt(static_cast<double>(p.n_train()));
        const Matrix A1 = A_.rightCols(p.size());
        linear_ = A1 * p.projection().transpose();
        offset_ = A_.col(0) * c - linear_ * p.mean();
    }
}

Vector ConditionalExpectationModel::predict(const Eigen::Ref<const Vector>& z) const {
    if (z.size() != input_dim()) {
        throw DimensionError("predict: expected a delay state of dimension " + std::to_string(input_dim()));
    }
    Vector out;
    if (basis_.kind() == Basis::Kind::pod) {
        if (!z.allFinite()) throw NonFiniteError("predict: non-finite delay state");
        out = offset_ + linear_ * z;
    } else {
        out = A_ * basis_.features(z);
    }
    if (!out.allFinite()) throw NonFiniteError("predict: non-finite features");
    return out;
}

void ConditionalExpectationModel::save(const std::filesystem::path& dir, const std::string& prefix) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create model directory " + dir.string() + ": " + ec.message());
    io::KeyValues kv;
    kv["format_version"] = "1";
    kv["lambda"] = io::format_double(lambda_);
    kv["outputs"] = std::to_string(A_.rows());
    kv["features"] = std::to_string(A_.cols());
    kv["basis"] = prefix + "basis.meta";
    io::write_key_values(kv, dir / (prefix + "model.meta"));
    io::write_matrix_csv(A_, dir / (prefix + "A.csv"));
    io::write_matrix_csv(czz_, dir / (prefix + "czz.csv"));
    io::write_matrix_csv(czz_.diagonal().transpose(), dir / (prefix + "czz_diag.csv"));
    io::write_matrix_csv(residual_cov_, dir / (prefix + "residual_cov.csv"));
    save_basis(basis_, dir, prefix);
}

ConditionalExpectationModel ConditionalExpectationModel::load(const std::filesystem::path& dir,
                                                              const std::string& prefix) {
    const auto meta = dir / (prefix + "model.meta");
    const auto kv = io::read_key_values(meta);
    if (io::require_key(kv, "format_version", meta) != "1") {
        throw IoError(meta.string() + ": unsupported model format version");
    }
    const double lambda = io::parse_double(io::require_key(kv, "lambda", meta), meta.string() + ": lambda");
    Basis basis = load_basis(dir, prefix);
    Matrix A = io::read_matrix_csv(dir / (prefix + "A.csv"));
    Matrix czz = io::read_matrix_csv(dir / (prefix + "czz.csv"));
    Matrix rc = io::read_matrix_csv(dir / (prefix + "residual_cov.csv"));
    try {
        return ConditionalExpectationModel(std::move(basis), std::move(A), lambda, std::move(czz), std::move(rc));
    } catch (const Error& e) {
        throw IoError(meta.string() + ": inconsistent model bundle: " + e.what());
    }
}

ConditionalExpectationModel fit_conditional_expectation(const DesignMatrices& dm, const Basis& basis, double lambda,
                                                        const FitOptions& options) {
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    check_design(dm, basis);
    const Eigen::Index M = dm.Z.rows();
    const Eigen::Index L = basis.size();
    const Eigen::Index ng = dm.G.cols();
    const Eigen::Index block = std::max<Eigen::Index>(1, options.block_rows);

    Matrix PtP = Matrix::Zero(L, L);
    Matrix PtG = Matrix::Zero(L, ng);
    Matrix phi;
    for (Eigen::Index r0 = 0; r0 < M; r0 += block) {
        const Eigen::Index rows = std::min(block, M - r0);
        phi.resize(rows, L);
        basis.features_rows(dm.Z.middleRows(r0, rows), phi);
        PtP.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
        PtG.noalias() += phi.transpose() * dm.G.middleRows(r0, rows);
    }
    PtP.triangularView<Eigen::StrictlyUpper>() = PtP.transpose();
    const double inv_m = 1.0 / static_cast<double>(M);
    Matrix czz = PtP * inv_m;
    if (!czz.allFinite()) throw NonFiniteError("non-finite features while fitting");

    Matrix A = regularized_solve(czz, lambda, PtG * inv_m).transpose();

    // residual covariance, second pass
    Vector rsum = Vector::Zero(ng);
    Matrix rr = Matrix::Zero(ng, ng);
    Matrix res;
    for (Eigen::Index r0 = 0; r0 < M; r0 += block) {
        const Eigen::Index rows = std::min(block, M - r0);
        phi.resize(rows, L);
        basis.features_rows(dm.Z.middleRows(r0, rows), phi);
        res = dm.G.middleRows(r0, rows);
        res.noalias() -= phi * A.transpose();
        rsum += res.colwise().sum().transpose();
        rr.noalias() += res.transpose() * res;
    }
    const Vector rmean = rsum * inv_m;
    Matrix rcov = rr * inv_m - rmean * rmean.transpose();
    rcov = psd_repair(rcov);
    return ConditionalExpectationModel(basis, std::move(A), lambda, std::move(czz), std::move(rcov));
}

SampleWeightedEstimator::SampleWeightedEstimator(const ConditionalExpectationModel& model,
                                                 const Eigen::Ref<const Matrix>& z_train)
    : basis_(model.basis()) {
    if (z_train.cols() != basis_.input_dim() || z_train.rows() == 0) {
        throw DimensionError("training delay states do not match the model basis");
    }
    const Eigen::Index M = z_train.rows();
    Matrix phi(M, basis_.size());
    basis_.features_rows(z_train, phi);
    // W = Phi K^{-1} / M, K symmetric
    W_ = regularized_solve(model.c_zz(), model.lambda(), phi.transpose()).transpose() / static_cast<double>(M);
}

Vector SampleWeightedEstimator::weights(const Eigen::Ref<const Vector>& z) const {
    const Vector phi = basis_.features(z);
    if (!phi.allFinite()) throw NonFiniteError("non-finite features");
    return W_ * phi;
}

Vector predict_general_drift(const SampleWeightedEstimator& est, const DriftSampler& a, const Vector& x_hat,
                             const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Matrix>& y_train) {
    if (y_train.rows() != est.samples()) throw DimensionError("one training y row per weight is required");
    const Vector w = est.weights(z);
    Vector acc;
    for (Eigen::Index i = 0; i < y_train.rows(); ++i) {
        const Vector v = a(x_hat, y_train.row(i).transpose());
        if (!v.allFinite()) throw NonFiniteError("drift sampler returned a non-finite value at sample " + std::to_string(i));
        if (i == 0) acc = Vector::Zero(v.size());
        acc.noalias() += w(i) * v;
    }
    return acc;
}

Matrix conditional_second_moment(const SampleWeightedEstimator& est, const DiffusionSampler& b, const Vector& x_hat,
                                 const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Matrix>& y_train) {
    if (y_train.rows() != est.samples()) throw DimensionError("one training y row per weight is required");
    const Vector w = est.weights(z);
    Matrix acc;
    for (Eigen::Index i = 0; i < y_train.rows(); ++i) {
        const Matrix bi = b(x_hat, y_train.row(i).transpose());
        if (!bi.allFinite()) {
            throw NonFiniteError("diffusion sampler returned a non-finite value at sample " + std::to_string(i));
        }
        if (i == 0) acc = Matrix::Zero(bi.rows(), bi.rows());
        acc.noalias() += w(i) * (bi * bi.transpose());
    }
    return psd_repair(acc);
}

ConditionalDensityModel::ConditionalDensityModel(HermiteBasis y_basis, Basis z_basis, Matrix coeff)
    : y_basis_(std::move(y_basis)), z_basis_(std::move(z_basis)), coeff_(std::move(coeff)) {
    if (coeff_.rows() != y_basis_.size() || coeff_.cols() != z_basis_.size()) {
        throw DimensionError("density coefficients must be K x L");
    }
    const double d = y_basis_.input_dim();
    log_norm_ = std::log(std::abs(y_basis_.whitening().determinant())) - 0.5 * d * std::log(2.0 * std::numbers::pi);
}

Vector ConditionalDensityModel::series_coefficients(const Eigen::Ref<const Vector>& z) const {
    return coeff_ * z_basis_.features(z);
}

double ConditionalDensityModel::weight(const Eigen::Ref<const Vector>& y) const {
    const Vector u = y_basis_.whitening() * (y - y_basis_.mean());
    return std::exp(log_norm_ - 0.5 * u.squaredNorm());
}

ConditionalDensityModel fit_conditional_density(const DesignMatrices& dm, int y_degree, const Basis& z_basis,
                                                double lambda) {
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    if (y_degree < 0) throw InvalidArgument("y basis degree must be >= 0");
    check_design(dm, z_basis);
    HermiteBasis yb = fit_hermite(dm.G, y_degree, y_degree);
    const Eigen::Index M = dm.Z.rows();
    if (yb.size() > M) {
        throw InvalidArgument("y basis has " + std::to_string(yb.size()) + " functions but only " +
                              std::to_string(M) + " samples are available");
    }
    Matrix psi(M, yb.size());
    yb.evaluate_rows(dm.G, psi);
    Matrix phi(M, z_basis.size());
    z_basis.features_rows(dm.Z, phi);
    const double inv_m = 1.0 / static_cast<double>(M);
    const Matrix czz = (phi.transpose() * phi) * inv_m;
    const Matrix czy = (phi.transpose() * psi) * inv_m;
    Matrix coeff = regularized_solve(czz, lambda, czy).transpose();
    return ConditionalDensityModel(std::move(yb), z_basis, std::move(coeff));
}

double density_evaluate(const ConditionalDensityModel& model, const Eigen::Ref<const Vector>& y,
                        const Eigen::Ref<const Vector>& z) {
    if (y.size() != model.y_basis().input_dim()) throw DimensionError("density_evaluate: wrong y dimension");
    const Vector c = model.series_coefficients(z);
    const Vector psi = model.y_basis().evaluate(y);
    return model.weight(y) * psi.dot(c);
}

}  // namespace mdyn
